# Copyright 2026 The crfner Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates the frozen scorer fixtures in conlleval/.

Each NN.txt holds token<TAB>gold<TAB>pred rows; NN.expected is the report the
reference scorer printed for it. Run with the `conlleval` package installed:

    python3 generate_conlleval_fixtures.py
"""

import os
import random

import conlleval

CLASSES = ["PESSOA", "LOCAL", "ORGANIZACAO", "TEMPO", "VALOR"]
HERE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "conlleval")


def random_entities(rng, n, classes):
    ents, i = [], 0
    while i < n:
        if rng.random() < 0.3:
            length = rng.randint(1, 4)
            if i + length <= n:
                ents.append((i, i + length, rng.choice(classes)))
                i += length + rng.randint(0, 1)
                continue
        i += 1
    return ents


def to_tags(ents, n):
    tags = ["O"] * n
    for s, e, c in ents:
        tags[s] = "B-" + c
        for k in range(s + 1, e):
            tags[k] = "I-" + c
    return tags


def perturb(rng, ents, n, classes):
    out = []
    for s, e, c in ents:
        r = rng.random()
        if r < 0.6:
            out.append((s, e, c))
        elif r < 0.7:
            out.append((s, e, rng.choice(classes)))
        elif r < 0.8:
            out.append((s, min(n, e + 1), c))
        elif r < 0.9 and e - s > 1:
            out.append((s + 1, e, c))
    for s, e, c in random_entities(rng, n, classes):
        if rng.random() < 0.1:
            out.append((s, e, c))
    out.sort()
    kept, end = [], 0
    for s, e, c in out:
        if s >= end:
            kept.append((s, e, c))
            end = e
    return kept


def main():
    rng = random.Random(2024)
    os.makedirs(HERE, exist_ok=True)
    for f in range(50):
        classes = rng.sample(CLASSES, rng.randint(1, len(CLASSES)))
        lines = []
        predicted = 0
        for _ in range(rng.randint(1, 8)):
            n = rng.randint(1, 30)
            gold = random_entities(rng, n, classes)
            pred = perturb(rng, gold, n, classes)
            predicted += len(pred)
            for i, (g, p) in enumerate(zip(to_tags(gold, n), to_tags(pred, n))):
                lines.append(f"w{rng.randint(0, 99)}\t{g}\t{p}")
            lines.append("")
        if predicted == 0:
            lines.insert(0, "x\tO\tB-" + classes[0])
            lines.insert(1, "")
        text = "\n".join(lines) + "\n"
        with open(os.path.join(HERE, f"{f:02d}.txt"), "w") as fh:
            fh.write(text)
        with open(os.path.join(HERE, f"{f:02d}.expected"), "w") as fh:
            fh.write(conlleval.report(conlleval.evaluate(text.splitlines())))


if __name__ == "__main__":
    main()
