"""Counter-mode amounts can be re-keyed into bigger ones; commitments cannot."""

import random

from rcbdc.attackdemo import (ToyCipherConfig, forgery_trial, pedersen_second_openings,
                              pedersen_substitution_trial, theoretical_rate)
from rcbdc.group import profile_params, toy_params
from rcbdc.pedersen import Opening


def main():
    cfg = ToyCipherConfig(16)
    for q1 in (0, 1000, 30000, 65000):
        rate = forgery_trial(cfg, q1, 100_000, seed=q1)
        print(f"q1={q1:5d}  empirical {rate:.5f}  theory {theoretical_rate(cfg, q1):.5f}")

    toy = toy_params()
    others = pedersen_second_openings(toy, Opening(2, 5), range(toy.q))
    print(f"\n23-element group: {len(others)} other openings of commit(2, 5), "
          f"each revealing log_g(h) = {toy.trapdoor}")
    hits = pedersen_substitution_trial(profile_params("test"), Opening(1000, 12345), 16, 5000,
                                       random.Random(0))
    print(f"64-bit group: {len(hits)} larger openings found in 5000 re-randomizations")


if __name__ == "__main__":
    main()
