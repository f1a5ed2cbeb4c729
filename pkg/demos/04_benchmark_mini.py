"""A miniature benchmark run through the library API.

Ten-replicate version of one scenario cell; the CLI command

    hdrkit bench --scenarios S2 --n 100 --measures m0-kde,m1,m3-ecdf \
        --reps 10 --seed 42 --out results.csv --summary summary.csv

produces exactly these numbers (byte-identical CSVs, any worker count).
"""

from hdrkit.benchmark import RunConfig, run_bench, write_results_csv, write_summary_csv

config = RunConfig(
    scenarios=("S2",),
    ns=(100,),
    measures=("m0-kde", "m1", "m3-ecdf"),
    reps=10,
    alpha=0.05,
    seed=42,
    ref_size=10 ** 5,
    workers=1,
)
records, summary = run_bench(config)

print(f"{'measure':10s} {'err':>8s} {'fnr':>8s} {'mcc':>8s}")
for m in config.measures:
    cell = summary[("S2", 100, m)]
    print(f"{m:10s} {cell['err'][0]:8.4f} {cell['fnr'][0]:8.4f} {cell['mcc'][0]:8.4f}")

write_results_csv("mini_results.csv", records)
write_summary_csv("mini_summary.csv", config, summary)
print("\nwrote mini_results.csv and mini_summary.csv")
print("per-replicate hyperparameters are recorded in the results file, e.g.:")
print(" ", records[0].measure, records[0].hyperparams)
