"""Command-line entry point: ``quasilocal <subcommand> --config FILE [--out DIR]``.

Exit status is 0 when every verdict passes, 2 when a verdict fails and 1
on an execution error (an ``error.json`` record is written to the output
directory when one is known).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .errors import QuasiLocalError
from .experiments import (ExperimentConfig, ExperimentError, load_config,
                          run_experiment, write_embedding_dump)

EXIT_OK, EXIT_ERROR, EXIT_VERDICT = 0, 1, 2

_SUBCOMMAND_KINDS = {
    "validate": ("validate",),
    "mass": ("mass_table",),
    "converge": ("converge_by", "converge_adm", "hawking_divergence"),
    "lemmas": ("lemma_decay_checks",),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment configuration file")
    common.add_argument("--out", type=Path, help="output directory (overrides the config)")
    common.add_argument("--quad-panels", type=int, help="initial Gauss-Legendre panels")
    common.add_argument("--quad-nodes", type=int, help="nodes per panel (4..64)")
    common.add_argument("--workers", type=int, help="threads used across scales")

    parser = argparse.ArgumentParser(
        prog="quasilocal", parents=[common],
        description="Quasi-local masses of revolution surfaces in asymptotically "
                    "Schwarzschild manifolds.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check the convexity conditions")
    sub.add_parser("mass", parents=[common], help="tabulate masses over the scale list")
    sub.add_parser("converge", parents=[common],
                   help="convergence study (converge_by, converge_adm, hawking_divergence)")
    sub.add_parser("lemmas", parents=[common], help="measured decay orders")
    dump = sub.add_parser("embed-dump", parents=[common],
                          help="write the embedded generating curve and H0 per scale")
    dump.add_argument("--nodes", type=int, default=257, help="samples per curve")
    return parser


def _merge(args, cfg: ExperimentConfig) -> ExperimentConfig:
    changes = {}
    if args.out is not None:
        changes["out_dir"] = str(args.out)
    if args.workers is not None:
        changes["workers"] = args.workers
    quad = cfg.quad
    if args.quad_panels is not None:
        quad = replace(quad, panels=args.quad_panels)
    if args.quad_nodes is not None:
        quad = replace(quad, nodes_per_panel=args.quad_nodes)
    changes["quad"] = quad
    allowed = _SUBCOMMAND_KINDS.get(args.command)
    if allowed and cfg.kind not in allowed:
        changes["kind"] = allowed[0]
    return replace(cfg, **changes)


def _print_summary(study):
    for r in study.reports:
        print(f"a={r.a:<10g} m_BY={r.m_by:.12g}  m_H={r.m_hawking:.12g}  "
              f"m_ADM={r.m_adm_flux:.12g}")
    for name, fit in study.fits.items():
        if fit is not None:
            print(f"fit {name}: order {fit.fitted_order:.4f}  constant "
                  f"{fit.fitted_constant:.4g}  r^2 {fit.r_squared:.6f}")
    for name, v in study.verdicts.items():
        print(f"[{'PASS' if v['passed'] else 'FAIL'}] {name}: {v['detail']}")


def _write_error(out_dir, record):
    if out_dir is None:
        return
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    (path / "error.json").write_text(json.dumps(record, indent=2) + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = args.out
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        cfg = _merge(args, cfg)
        out_dir = cfg.out_dir
        if args.command == "embed-dump":
            for path in write_embedding_dump(cfg, cfg.out_dir or ".", nodes=args.nodes):
                print(path)
            return EXIT_OK
        study = run_experiment(cfg)
    except ExperimentError as exc:
        record = exc.record()
        _write_error(out_dir, record)
        print(json.dumps(record), file=sys.stderr)
        return EXIT_ERROR
    except (QuasiLocalError, ValueError, OSError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc), "a": None,
                  "stage": "setup"}
        _write_error(out_dir, record)
        print(json.dumps(record), file=sys.stderr)
        return EXIT_ERROR
    _print_summary(study)
    return EXIT_OK if study.passed else EXIT_VERDICT


if __name__ == "__main__":
    sys.exit(main())
