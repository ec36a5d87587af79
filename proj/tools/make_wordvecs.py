#!/usr/bin/env python3
"""Regenerates data/wordvecs.txt, the curated word-vector store shipped with the repo.

Garment words cluster around one random direction per attribute category, colour
and other descriptive adjectives get their own near-orthogonal directions, and
person nouns sit on a separate direction so they never clear the assignment
threshold. Output is deterministic for a given seed.
"""
import argparse

import numpy as np

CATEGORIES = {
    "head": ["hat", "cap", "beanie", "helmet", "glasses", "sunglasses", "hair", "hood", "headband"],
    "upper": ["shirt", "jersey", "polo", "jacket", "coat", "sweater", "tshirt", "top", "blouse",
              "hoodie", "blazer", "vest", "cardigan", "tee"],
    "lower": ["pants", "trousers", "skirt", "shorts", "jeans", "leggings", "capris", "slacks"],
    "shoes": ["shoes", "sneakers", "boots", "sandals", "heels", "slippers", "loafers", "footwear"],
    "bags": ["bag", "backpack", "handbag", "purse", "satchel", "suitcase", "tote", "luggage"],
}
COLOURS = ["black", "white", "red", "blue", "green", "yellow", "gray", "grey", "purple", "brown",
           "pink", "orange", "tan", "navy", "beige", "khaki", "dark", "light"]
DESCRIPTORS = ["long", "short", "striped", "plaid", "sleeveless", "tight", "loose", "small",
               "large", "big", "little", "young", "old", "blond"]
PEOPLE = ["man", "woman", "girl", "boy", "person", "lady", "guy", "pedestrian", "child", "female",
          "male"]
VERBS = ["wearing", "wears", "wear", "carrying", "carries", "carry", "walking", "walks", "holding",
         "holds", "standing", "looking", "dressed", "has", "have"]


def unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--dim", type=int, default=300)
    parser.add_argument("--seed", type=int, default=20200823)
    parser.add_argument("--out", default="data/wordvecs.txt")
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    rows = []
    for words in CATEGORIES.values():
        axis = unit(rng, args.dim)
        for w in words:
            rows.append((w, 2.0 * axis + 0.9 * unit(rng, args.dim)))
    colour_axis = unit(rng, args.dim)
    for w in COLOURS:
        rows.append((w, 0.3 * colour_axis + unit(rng, args.dim)))
    for w in DESCRIPTORS:
        rows.append((w, unit(rng, args.dim)))
    person_axis = unit(rng, args.dim)
    for w in PEOPLE:
        rows.append((w, 1.5 * person_axis + 0.6 * unit(rng, args.dim)))
    for w in VERBS:
        rows.append((w, unit(rng, args.dim)))

    with open(args.out, "w", encoding="utf-8") as f:
        f.write(f"d_w {args.dim}\n")
        for token, vec in rows:
            f.write(token + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")


if __name__ == "__main__":
    main()
