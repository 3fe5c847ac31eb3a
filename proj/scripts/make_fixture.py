#!/usr/bin/env python3
"""Regenerates the bundled synthetic corpus under assets/fixtures/.

The corpus is small enough to eyeball: 60 stories across six topics and
three sites, 30 tweets, 16-dim embeddings with one-hot topic centroids,
story-type annotations for a third of the stories, and a pre-recorded
page-existence cache. Deterministic; rerunning reproduces identical files.
"""

import json
import math
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "assets" / "fixtures"

TOPICS = [
    {
        "name": "photos-videos-callout",
        "type": "CorrectionCallingOut",
        "texts": [
            "Viral video claims to show crowded market spreading the virus",
            "Photo of empty shelves was debunked by fact checkers as old footage",
            "Experts answer questions about the rumor in a viral clip",
            "Old video resurfaces claiming bat soup caused the outbreak",
            "Image said to show patients collapsing was taken years earlier",
        ],
        "window": ("2020-01-30", "2020-06-01"),
    },
    {
        "name": "figures-conspiracy",
        "type": "Conspiracy",
        "texts": [
            "Studies show the coronavirus was engineered to be a bioweapon",
            "Did Nostradamus Predict the pandemic centuries ago",
            "Did Kim Jong Un Order North Korea First Coronavirus Patient To Be Executed",
            "Claim says Donald Trump called the outbreak a planned hoax",
            "5g towers are secretly spreading the infection say posts",
        ],
        "window": ("2020-01-29", "2020-05-20"),
    },
    {
        "name": "false-health-responses",
        "type": "FakeTruePublicHealthResponses",
        "texts": [
            "The health ministry issued an emergency notification recommending people keep their throats moist",
            "Department of health quarantine order covers every city says message",
            "A health advisory told residents to disinfect banknotes in ovens",
            "Claim that the who declared drinking water cures the infection",
            "Emergency notification about mandatory vitamin doses was fabricated",
        ],
        "window": ("2020-01-31", "2020-04-20"),
    },
    {
        "name": "social-commercial",
        "type": "CommercialActivityPromotion",
        "texts": [
            "Kuwait boycotted the products of a dairy company over the outbreak",
            "Store offers free masks promotion to every customer says post",
            "Company donated millions in coupons for quarantined families",
            "Boycott of imported goods announced after contamination rumor",
            "Discount sale on sanitizer claimed to be government funded",
        ],
        "window": ("2020-01-29", "2020-04-06"),
    },
    {
        "name": "fake-cures",
        "type": "FakeCures",
        "texts": [
            "Grape vinegar is the antidote to the virus says viral message",
            "Vitamin c with zinc can prevent and treat the infection",
            "There is magically already a vaccine available claims post",
            "Garlic soup is a proven cure according to forwarded text",
            "Drinking bleach kills the virus in minutes says remedy post",
        ],
        "window": ("2020-03-16", "2020-04-09"),
    },
    {
        "name": "public-health-responses",
        "type": "EmergencyResponses",
        "texts": [
            "Government built a hospital for a thousand people in ten days",
            "Billions in rupees donated to fight the outbreak says report",
            "Army enforces lockdown with curfew across the capital",
            "Evacuation flights scheduled for stranded citizens this week",
            "Emergency stockpile of ventilators released to hospitals",
        ],
        "window": ("2020-02-03", "2020-05-14"),
    },
]

# validity pools per topic: mostly false, as fact-check corpora tend to be
VALIDITY_POOLS = [
    ["False", "Fake", "Misleading", "Pants on fire", "Mostly False", "True"],
    ["False", "Falseo", "Scam", "Pants-fire", "Unproven", "Two Pinocchios"],
    ["False", "Fake", "No evidence", "Misleading", "Partly False", "Correct"],
    ["False", "Misleading", "Half true", "Fake", "Unverified", "Mostly True"],
    ["False", "Fake", "Pants on fire", "Scam", "Misleading", "Barely-true"],
    ["True", "Correct Attribution", "False", "Mostly True", "Half truth", "In dispute"],
]

HARMONIZED = {
    "Correct": "True", "Correct Attribution": "True", "True": "True",
    "Half true": "PartiallyTrue", "Half truth": "PartiallyTrue",
    "Mixed": "PartiallyTrue", "Mixture": "PartiallyTrue",
    "Mostly True": "PartiallyTrue", "Partially True": "PartiallyTrue",
    "Partly True": "PartiallyTrue", "Partially correct": "PartiallyTrue",
    "True but": "PartiallyTrue",
    "Mostly False": "PartiallyFalse", "Partly False": "PartiallyFalse",
    "Partially False": "PartiallyFalse", "Two Pinocchios": "PartiallyFalse",
    "False": "False", "Falseo": "False", "Fake": "False",
    "Misleading": "False", "Pants on fire": "False", "Pants-fire": "False",
    "Scam": "False", "Barely-true": "False",
    "Org. doesn't apply rating": "Unknown", "In dispute": "Unknown",
    "No evidence": "Unknown", "Unproven": "Unknown", "Unverified": "Unknown",
    "Suspicions": "Unknown",
}

MEDIUMS = ["Facebook", "WhatsApp, Facebook", "https://example.net", "Twitter",
           "Instagram", None, "YouTube", "Facebook, WhatsApp"]

VALIDITY_AXES = {"False": (2.0, 0.0), "PartiallyFalse": (1.4, 0.6),
                 "PartiallyTrue": (0.6, 1.4), "True": (0.0, 2.0),
                 "Unknown": (1.0, 1.0)}

DIM = 16
SCALE = 8.0
NOISE = 0.45


def gauss(rng):
    return rng.gauss(0.0, 1.0)


def embedding(rng, topic_axis, validity):
    v = [0.0] * DIM
    v[topic_axis] = SCALE
    va, vb = VALIDITY_AXES[validity]
    v[6] += va
    v[7] += vb
    return [round(x + gauss(rng) * NOISE, 6) for x in v]


def date_range(start, end, n):
    from datetime import date, timedelta
    y, m, d = map(int, start.split("-"))
    a = date(y, m, d)
    y, m, d = map(int, end.split("-"))
    b = date(y, m, d)
    if n == 1:
        return [a.isoformat()]
    step = (b - a) / (n - 1)
    return [(a + step * i).isoformat() for i in range(n)]


def main():
    rng = random.Random(20200114)
    OUT.mkdir(parents=True, exist_ok=True)

    stories, embeddings, annotations = [], [], []

    for t, topic in enumerate(TOPICS):
        site_plan = [("poynter", "p", 5), ("snopes", "s", 2),
                     ("politifact", "f", 3)]
        ids = []
        dates = date_range(*topic["window"], 10)
        slot = 0
        for site, prefix, count in site_plan:
            for i in range(count):
                sid = f"{prefix}{t}-{i}"
                ids.append(sid)
                raw_validity = VALIDITY_POOLS[t][slot % len(VALIDITY_POOLS[t])]
                text = topic["texts"][slot % len(topic["texts"])]
                if site != "poynter":
                    # cross-site near-duplicates share the topic text so the
                    # agreement stage has real counterparts to find
                    text = topic["texts"][i % len(topic["texts"])]
                record = {
                    "id": sid,
                    "site": site,
                    "date": dates[slot],
                    "raw_validity": raw_validity,
                    "story": text,
                    "raw_medium": MEDIUMS[(t + slot) % len(MEDIUMS)],
                }
                if slot == 9 and t == 3:
                    del record["date"]  # one dateless record
                if record.get("raw_medium") is None:
                    del record["raw_medium"]
                stories.append(record)
                embeddings.append({
                    "id": sid,
                    "vector": embedding(rng, t, HARMONIZED[raw_validity]),
                })
                slot += 1

        # annotate one third: first two poynter stories and the first
        # snopes story of each topic, plus two extras below
        for sid in [ids[0], ids[1], ids[5]]:
            label = topic["type"]
            annotations.append({"id": sid, "label": label, "medium": "stories"})

    annotations.append({"id": "f0-0", "label": TOPICS[0]["type"], "medium": "stories"})
    annotations.append({"id": "f1-0", "label": "PublicFigures", "medium": "stories"})

    tweets = []
    tweet_dates = date_range("2020-02-10", "2020-05-25", 30)
    tweet_texts = {
        6: ["Everyone is panic buying toilet paper and rice again",
            "Shoppers stockpile groceries amid shortage rumor"],
        7: ["City announces total lockdown starting midnight says tweet",
            "Curfew extended for two weeks according to viral tweet"],
    }
    for i in range(30):
        if i < 24:
            t = i % 6
            axis = t
            text = TOPICS[t]["texts"][(i // 6) % len(TOPICS[t]["texts"])] + " via tweet"
            label = TOPICS[t]["type"]
        elif i < 27:
            axis, label = 8, "PanicBuying"
            text = tweet_texts[6][i % 2]
        else:
            axis, label = 9, "Lockdowns"
            text = tweet_texts[7][i % 2]
        tid = f"t-{i}"
        raw_validity = ["False", "Fake", "Unproven", "Misleading"][i % 4]
        tweets.append({
            "id": tid,
            "site": "twitter",
            "date": tweet_dates[i],
            "raw_validity": raw_validity,
            "story": text,
            "raw_medium": "Twitter",
            "kind": "Tweet",
        })
        embeddings.append({
            "id": tid,
            "vector": embedding(rng, axis, HARMONIZED[raw_validity]),
        })
        if i < 12 or i >= 24:
            annotations.append({"id": tid, "label": label, "medium": "tweets"})

    cache_entries = [
        ("Kim Jong Un", True),
        ("Donald Trump", True),
        ("Nostradamus", True),
        ("John Smith", False),
        ("Jane Doe", False),
    ]

    def dump_jsonl(path, rows):
        with open(path, "w") as f:
            for row in rows:
                f.write(json.dumps(row, separators=(",", ":")) + "\n")

    dump_jsonl(OUT / "stories.jsonl", stories)
    dump_jsonl(OUT / "tweets.jsonl", tweets)
    dump_jsonl(OUT / "embeddings.jsonl", embeddings)
    dump_jsonl(OUT / "annotations.jsonl", annotations)
    dump_jsonl(OUT / "wiki_cache.jsonl",
               [{"name": n, "exists": e, "checked_at": 1591315200}
                for n, e in cache_entries])

    print(f"stories={len(stories)} tweets={len(tweets)} "
          f"embeddings={len(embeddings)} annotations={len(annotations)}")


if __name__ == "__main__":
    main()
