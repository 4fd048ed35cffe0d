"""Brute-force frequent itemsets of a 4-record toy dataset.

Records over three binary attributes; every itemset of every length is
counted by direct scan and the frequent ones at sup_min = 0.5 are printed.
Exercises the inclusive threshold: the three pairs sit exactly at 0.5.
"""

from itertools import combinations, product

RECORDS = [(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0)]
SIZES = (2, 2, 2)
SUP_MIN = 0.5


def main():
    n = len(RECORDS)
    for length in range(1, 4):
        frequent = []
        for attrs in combinations(range(3), length):
            for cats in product(*(range(SIZES[a]) for a in attrs)):
                items = tuple(zip(attrs, cats))
                count = sum(all(r[a] == c for a, c in items) for r in RECORDS)
                if count / n >= SUP_MIN:
                    frequent.append((items, count / n))
        print(f"length {length}: {len(frequent)} frequent")
        for items, sup in sorted(frequent):
            print("  ", items, sup)


if __name__ == "__main__":
    main()
