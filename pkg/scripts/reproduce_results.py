#!/usr/bin/env python3
"""Run the headline synthetic experiment end to end.

Four stages, each into its own subdirectory of --out: multi-run evaluation
with confidence intervals, the five-variant ablation, the early-detection
curve, and attention explanations for one trained run. The defaults match
the calibrated demonstration setup (400 examples, both signals at 0.5, ten
runs); --quick shrinks it to a two-run smoke pass.
"""

import argparse
import sys
from pathlib import Path

from mvan.cli import main as mvan

BASE = [
    "experiment.seed=100",
    "synthetic.n_examples=400",
    "synthetic.vocab_size=80",
    "synthetic.mean_retweets=5",
    "synthetic.text_signal_strength=0.5",
    "synthetic.graph_signal_strength=0.5",
    "model.embed_dim=16",
    "model.gru_hidden=8",
    "model.gru_layers=1",
    "model.attn_dim=8",
    "model.max_len=14",
    "model.gat_heads=2",
    "model.gat_hidden_per_head=8",
    "model.gat_output_dim=8",
    "model.head_hidden=16",
    "model.dropout=0",
    "trainer.batch_size=32",
    "trainer.epochs=10",
    "trainer.patience=0",
    "trainer.val_fraction=0",
    "trainer.learning_rate=0.003",
]


def stage(name: str, command: str, out: Path, overrides: list) -> None:
    print(f"\n=== {name} -> {out} ===")
    code = mvan([command, f"experiment.output_dir={out}"] + overrides)
    if code != 0:
        sys.exit(code)


def run(args) -> None:
    out = Path(args.out)
    overrides = BASE + [f"experiment.n_runs={2 if args.quick else 10}"]
    if args.quick:
        overrides += ["synthetic.n_examples=200"]
    overrides += args.overrides

    stage("multi-run evaluation", "evaluate", out / "evaluate", overrides)
    stage("variant ablation", "ablate", out / "ablation", overrides)
    stage(
        "early detection",
        "early-detect",
        out / "early_detection",
        overrides + ["early_detection.fractions=0.1,0.25,0.5,1.0"],
    )
    stage("explanations", "explain", out / "explain", overrides)

    print("\nartifacts:")
    for path in sorted(out.rglob("*")):
        if path.is_file():
            print(f"  {path}")


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="runs/reproduction", help="output directory")
    parser.add_argument("--quick", action="store_true", help="2 runs on 200 examples")
    parser.add_argument(
        "overrides",
        nargs="*",
        metavar="section.key=value",
        help="extra config overrides applied to every stage",
    )
    return parser.parse_args(argv)


if __name__ == "__main__":
    run(parse_args())
