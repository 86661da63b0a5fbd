"""Three payers, six payees, one aggregated transaction run through the scenario engine."""

from rcbdc.scenario import ScenarioConfig, run_scenario

SCRIPT = """
MINT lisa 10
MINT mark 10
MINT nora 10
BATCH lisa ana:4 ben:6 | mark cat:5 dan:5 | nora eve:1 fay:9
EXPECT-ACCEPT
"""


def main():
    tr = run_scenario(ScenarioConfig(seed=1, n_bits=8), SCRIPT)
    for row in tr.rows:
        if row[2] in ("aggregate", "decision", "receipt", "review"):
            print(f"{row[2]:>9} {row[3]:>5}  {row[7]}")
    print("expectations met:", all(e[3] for e in tr.expectations))
    print("openings seen by the central bank:", len(tr.openings_delivered_to("cb")))


if __name__ == "__main__":
    main()
