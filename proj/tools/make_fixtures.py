#!/usr/bin/env python3
# Copyright 2026 The TEA Robustness Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Generates the bundled review corpora and the static synonym table.

The corpora are synthetic two-class movie reviews (0 = negative,
1 = positive). Output is deterministic for a given --seed.

  python3 tools/make_fixtures.py --out data
"""

import argparse
import json
import os
import random

SUBJECTS = [
    "the film", "the movie", "this picture", "the story", "the plot",
    "the script", "the acting", "the cast", "the director", "the soundtrack",
    "the ending", "the dialogue", "the cinematography", "the lead actor",
    "the pacing", "the score", "the visuals", "the villain", "the humor",
    "the editing",
]

POSITIVE = [
    "great", "excellent", "wonderful", "superb", "brilliant", "delightful",
    "enjoyable", "charming", "moving", "beautiful", "fantastic", "memorable",
    "clever", "funny", "engaging", "gripping", "solid", "fresh",
]

NEGATIVE = [
    "terrible", "awful", "boring", "dreadful", "dull", "poor", "horrible",
    "weak", "bland", "tedious", "clumsy", "messy", "forgettable",
    "predictable", "lifeless", "painful", "stale", "silly",
]

ADVERBS = [
    "really", "truly", "quite", "very", "extremely", "rather", "pretty",
    "remarkably", "surprisingly", "genuinely",
]

POSITIVE_VERDICTS = [
    "i loved it", "i would watch it again", "it kept me hooked",
    "it was worth every minute", "highly recommended", "i enjoyed every scene",
    "my friends loved it too", "a real treat for the family",
]

NEGATIVE_VERDICTS = [
    "i hated it", "i walked out early", "it wasted my evening",
    "it was a waste of time", "not recommended", "i nearly fell asleep",
    "my friends hated it too", "a real letdown for the family",
]

NEUTRAL = [
    "we saw it on friday", "my friend picked it", "it runs about two hours",
    "the theater was crowded", "it is based on a novel",
    "the trailer came out last year", "we watched it at home",
    "it was released in the summer", "i went with my sister",
    "the tickets were cheap",
]

VERBS = ["was", "is", "felt", "seemed", "looked"]

# Static synonym table in the style of a counter-fitted synonym embedding:
# neighbours are mostly true synonyms, some sense-shifted, some rare.
SYNONYMS = {
    "great": ["large", "big", "grand", "huge", "tremendous", "terrific"],
    "excellent": ["outstanding", "exceptional", "superb", "splendid", "fine"],
    "wonderful": ["marvelous", "wondrous", "terrific", "splendid", "lovely"],
    "superb": ["excellent", "magnificent", "splendid", "superlative"],
    "brilliant": ["bright", "shiny", "luminous", "smart", "genius"],
    "delightful": ["pleasant", "lovely", "pleasing", "charming"],
    "enjoyable": ["pleasant", "pleasurable", "amusing", "entertaining"],
    "charming": ["adorable", "lovely", "endearing", "delightful"],
    "moving": ["touching", "poignant", "emotional", "stirring", "shifting"],
    "beautiful": ["gorgeous", "pretty", "lovely", "handsome", "stunning"],
    "fantastic": ["fabulous", "fantastical", "imaginary", "terrific"],
    "memorable": ["notable", "unforgettable", "remarkable", "historic"],
    "clever": ["smart", "intelligent", "witty", "shrewd", "cunning"],
    "funny": ["amusing", "comic", "humorous", "odd", "weird", "hilarious"],
    "engaging": ["engrossing", "absorbing", "interesting", "attractive"],
    "gripping": ["riveting", "thrilling", "grasping", "exciting"],
    "solid": ["firm", "sturdy", "sound", "strong", "robust"],
    "fresh": ["new", "novel", "cool", "clean", "original"],
    "terrible": ["horrible", "awful", "dreadful", "horrendous", "atrocious"],
    "awful": ["terrible", "horrible", "dreadful", "lousy", "appalling"],
    "boring": ["tedious", "dull", "monotonous", "uninteresting", "drilling"],
    "dreadful": ["awful", "terrible", "frightful", "horrible"],
    "dull": ["boring", "tedious", "blunt", "dim", "muted"],
    "poor": ["bad", "inferior", "needy", "weak", "mediocre"],
    "horrible": ["terrible", "horrendous", "awful", "hideous", "ghastly"],
    "weak": ["feeble", "frail", "flimsy", "fragile", "faint"],
    "bland": ["insipid", "tasteless", "flavorless", "mild", "plain"],
    "tedious": ["boring", "dull", "tiresome", "wearisome", "monotonous"],
    "clumsy": ["awkward", "inept", "bumbling", "gawky"],
    "messy": ["untidy", "chaotic", "cluttered", "sloppy", "dirty"],
    "forgettable": ["unmemorable", "ordinary", "unremarkable"],
    "predictable": ["foreseeable", "expected", "obvious", "routine"],
    "lifeless": ["dead", "inanimate", "listless", "inert"],
    "painful": ["hurtful", "sore", "agonizing", "excruciating"],
    "stale": ["old", "musty", "dated", "hackneyed", "moldy"],
    "silly": ["foolish", "stupid", "absurd", "ridiculous", "goofy"],
    "film": ["movie", "flick", "cinema", "picture", "motion"],
    "movie": ["film", "flick", "cinema", "picture"],
    "picture": ["image", "photo", "painting", "film", "portrait"],
    "story": ["tale", "narrative", "history", "floor", "account"],
    "plot": ["storyline", "scheme", "conspiracy", "intrigue", "parcel"],
    "script": ["screenplay", "manuscript", "text", "handwriting"],
    "acting": ["performing", "interim", "temporary", "playing"],
    "cast": ["actors", "throw", "shed", "mold", "plaster"],
    "director": ["filmmaker", "manager", "administrator", "chief"],
    "soundtrack": ["music", "score", "audio"],
    "ending": ["conclusion", "finale", "end", "termination", "finish"],
    "dialogue": ["dialog", "conversation", "discussion", "talks"],
    "really": ["truly", "actually", "genuinely", "indeed", "real"],
    "truly": ["really", "genuinely", "honestly", "indeed", "sincerely"],
    "quite": ["rather", "fairly", "pretty", "entirely", "somewhat"],
    "very": ["highly", "extremely", "awfully", "so", "super"],
    "extremely": ["exceedingly", "highly", "incredibly", "very", "vastly"],
    "rather": ["quite", "fairly", "somewhat", "instead", "preferably"],
    "pretty": ["quite", "fairly", "beautiful", "cute", "lovely"],
    "remarkably": ["notably", "strikingly", "extraordinarily", "unusually"],
    "surprisingly": ["astonishingly", "amazingly", "unexpectedly"],
    "genuinely": ["truly", "really", "sincerely", "honestly", "authentically"],
    "loved": ["adored", "liked", "cherished", "enjoyed"],
    "hated": ["loathed", "detested", "despised", "disliked"],
    "enjoyed": ["liked", "loved", "relished", "savored"],
    "recommended": ["suggested", "advised", "advocated", "endorsed"],
    "waste": ["squander", "garbage", "trash", "rubbish", "wastage"],
    "wasted": ["squandered", "lost", "misused", "drunk"],
    "humor": ["humour", "comedy", "wit", "mood"],
    "visuals": ["images", "graphics", "pictures", "imagery"],
    "villain": ["antagonist", "baddie", "criminal", "scoundrel"],
    "pacing": ["tempo", "rhythm", "striding", "speed"],
    "score": ["soundtrack", "music", "points", "tally", "grade"],
    "editing": ["cutting", "revision", "redaction", "editorial"],
    "seemed": ["appeared", "looked", "sounded"],
    "felt": ["seemed", "sensed", "touched", "perceived"],
    "looked": ["seemed", "appeared", "searched", "watched"],
    "treat": ["delight", "pleasure", "handle", "cure"],
    "letdown": ["disappointment", "anticlimax", "setback"],
    "friends": ["buddies", "mates", "pals", "companions"],
    "family": ["household", "relatives", "kin", "kinfolk"],
    "evening": ["night", "dusk", "sunset", "eve"],
    "minute": ["moment", "second", "instant", "tiny"],
    "scene": ["sequence", "episode", "setting", "venue"],
    "overall": ["altogether", "general", "global", "total"],
}


def phrase(rng, polarity):
    return rng.choice(POSITIVE_VERDICTS if polarity else NEGATIVE_VERDICTS)


def adjective(rng, polarity):
    return rng.choice(POSITIVE if polarity else NEGATIVE)


def make_review(rng, label):
    subj, subj2 = rng.sample(SUBJECTS, 2)
    adv = rng.choice(ADVERBS)
    verb = rng.choice(VERBS)
    templates = [
        lambda: f"{subj} {verb} {adv} {adjective(rng, label)} .",
        lambda: (f"{subj} was {adjective(rng, label)} and {subj2} was "
                 f"{adv} {adjective(rng, label)} ."),
        lambda: (f"{rng.choice(NEUTRAL)} . {subj} {verb} {adv} "
                 f"{adjective(rng, label)} , {phrase(rng, label)} ."),
        lambda: (f"i thought {subj} was {adjective(rng, 1 - label)} but "
                 f"{subj2} was {adv} {adjective(rng, label)} . "
                 f"{phrase(rng, label)} ."),
        lambda: (f"{subj} is {adjective(rng, label)} , {subj2} is "
                 f"{adjective(rng, label)} , and overall {phrase(rng, label)} ."),
        lambda: (f"{rng.choice(NEUTRAL)} and {subj} {verb} "
                 f"{adjective(rng, label)} . {phrase(rng, label)} !"),
        lambda: (f"{phrase(rng, label)} . {subj} was {adv} "
                 f"{adjective(rng, label)} even if {subj2} {verb} "
                 f"{adjective(rng, 1 - label)} ."),
        lambda: (f"{subj} {verb} {adjective(rng, label)} , {subj2} {verb} "
                 f"{adv} {adjective(rng, label)} and {rng.choice(NEUTRAL)} . "
                 f"{phrase(rng, label)} ."),
    ]
    return rng.choice(templates)()


def make_corpus(rng, n):
    rows = []
    for i in range(n):
        label = i % 2
        rows.append({"text": make_review(rng, label), "label": label})
    rng.shuffle(rows)
    return rows


def write_jsonl(path, rows):
    with open(path, "w") as f:
        for row in rows:
            f.write(json.dumps(row) + "\n")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="data")
    parser.add_argument("--seed", type=int, default=20260101)
    args = parser.parse_args()
    os.makedirs(args.out, exist_ok=True)

    write_jsonl(os.path.join(args.out, "reviews_fixture.jsonl"),
                make_corpus(random.Random(args.seed), 240))
    write_jsonl(os.path.join(args.out, "reviews_2k.jsonl"),
                make_corpus(random.Random(args.seed + 1), 2000))
    with open(os.path.join(args.out, "synonyms.json"), "w") as f:
        json.dump(SYNONYMS, f, indent=1, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()
