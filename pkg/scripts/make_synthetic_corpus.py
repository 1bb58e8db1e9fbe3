#!/usr/bin/env python3
"""Write the synthetic parallel fixture corpus used by the experiments.

Emits train/dev/test source-target pairs plus a monolingual target file
into the chosen directory, all derived deterministically from one seed.
"""

import argparse

from smtkit.synthdata import write_fixture_tree


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--train", type=int, default=1000)
    parser.add_argument("--dev", type=int, default=50)
    parser.add_argument("--test", type=int, default=100)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--out", default="fixture-corpus")
    args = parser.parse_args()
    paths = write_fixture_tree(args.train, args.dev, args.test, args.seed, args.out)
    for name in sorted(paths):
        print(paths[name])


if __name__ == "__main__":
    main()
