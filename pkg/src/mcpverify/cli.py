"""Command-line front end: space construction, check selection, report
serialization and figure emission.

Reports are deterministic: the same config and seed produce byte-identical
JSON.  Exit status is zero exactly when every selected check passes.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import plots, verifier
from .spaces import cone_space, suspension_space

SCHEMA_VERSION = 1

CHECK_SPACES = {
    "mcp": ("cone", "suspension"),
    "f-lemma": ("suspension",),
    "large-l": ("suspension",),
    "diameter": ("suspension",),
    "cd-failure": ("cone",),
    "dimension": ("cone", "suspension"),
    "tangent": ("suspension",),
    "geodesicity": ("cone", "suspension"),
}


@dataclass
class RunConfig:
    space: str = "suspension"
    checks: list = field(default_factory=list)
    resolution: float = None
    tol: float = 1e-9
    t_grid: int = 50
    l_grid: int = 500
    seed: int = 0
    out: str = "out"
    svg: bool = False
    mcp_configs: int = 200
    pair_count: int = 500
    cone_extent: float = 6.0

    def validate(self):
        if self.space not in ("cone", "suspension"):
            raise ValueError(f"unknown space {self.space!r}")
        if not self.checks:
            self.checks = [c for c, spaces in CHECK_SPACES.items() if self.space in spaces]
        for c in self.checks:
            if c not in CHECK_SPACES:
                raise ValueError(f"unknown check {c!r}")
            if self.space not in CHECK_SPACES[c]:
                raise ValueError(f"check {c!r} does not apply to the {self.space} space")
        if self.resolution is not None and self.resolution <= 0:
            raise ValueError("resolution must be positive")


def _default_resolution(config, check):
    if config.resolution is not None:
        return config.resolution
    if check == "cd-failure":
        return 1 / 200
    if check == "geodesicity" and config.space == "cone":
        return 0.02
    if config.space == "cone":
        return 2.0 * config.cone_extent / 400.0  # truncated diameter / 400
    return 0.0025


def _build_space(config):
    if config.space == "cone":
        return cone_space(config.cone_extent, config.cone_extent)
    return suspension_space()


def _run_check(check, config, space, rng):
    if check == "mcp":
        params = verifier.expected_params(space.tag)
        return verifier.verify_mcp(
            space, params, t_count=config.t_grid,
            bin_size=_default_resolution(config, check),
            tol_analytic=config.tol, rng=rng, min_configs=config.mcp_configs)
    if check == "f-lemma":
        return verifier.f_check(t_count=1001, l_count=config.l_grid)
    if check == "large-l":
        return verifier.large_l_chain_check(t_count=max(config.t_grid, 101),
                                            l_count=max(config.l_grid, 100))
    if check == "diameter":
        return verifier.diameter_check(space, resolution=_default_resolution(config, check),
                                       rng=rng)
    if check == "cd-failure":
        return verifier.cd_failure_search(space,
                                          resolution=_default_resolution(config, check))
    if check == "dimension":
        return verifier.dimension_check(space)
    if check == "tangent":
        return verifier.tangent_blowup_compare()
    if check == "geodesicity":
        return verifier.geodesicity_suite(space, pair_count=config.pair_count,
                                          resolution=_default_resolution(config, check),
                                          tol=config.tol, rng=rng)
    raise ValueError(check)


def run(config: RunConfig) -> int:
    """Execute the selected checks and write report.json / margins.csv / SVGs."""
    config.validate()
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    space = _build_space(config)
    reports = []
    all_rows = []
    for check in config.checks:
        rng = np.random.default_rng(config.seed)
        report, rows = _run_check(check, config, space, rng)
        reports.append((check, report))
        all_rows.extend(rows)
        status = report.verdict.upper()
        print(f"{status:12s} {report.name}: margin={report.margin:.6g} "
              f"(tolerance {report.tolerance:g})")
        if not report.passed():
            print(f"  witness: {report.witness}")
        if config.svg:
            plots.render(check, report, rows, out / f"{check}-{config.space}.svg")

    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": asdict(config),
        "checks": [r.to_jsonable() for _, r in reports],
        "all_pass": all(r.passed() for _, r in reports),
    }
    (out / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    with (out / "margins.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["check", "case", "source_x", "source_y",
                         "target_x", "target_y", "t", "margin"])
        writer.writerows(all_rows)
    return 0 if payload["all_pass"] else 1


def _parser():
    p = argparse.ArgumentParser(
        prog="mcpverify",
        description="Certify the contraction, diameter, dimension and tangent "
                    "properties of the two weighted Chebyshev spaces.")
    p.add_argument("--space", choices=("cone", "suspension"))
    p.add_argument("--check", action="append", choices=sorted(CHECK_SPACES),
                   help="repeatable; defaults to every check valid for the space")
    p.add_argument("--resolution", type=float, help="grid spacing / bin size override")
    p.add_argument("--tol", type=float, help="analytic tolerance (default 1e-9)")
    p.add_argument("--t-grid", type=int, dest="t_grid", help="time-grid size (default 50)")
    p.add_argument("--l-grid", type=int, dest="l_grid", help="length-grid size (default 500)")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--out", help="output directory (default ./out)")
    p.add_argument("--svg", action="store_true", default=None,
                   help="also render one SVG figure per check")
    p.add_argument("--config", help="JSON config file; flags override its values")
    return p


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    settings = {}
    if args.config:
        try:
            settings.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config file: {exc}")
    for key in ("space", "resolution", "tol", "t_grid", "l_grid", "seed", "out", "svg"):
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    if args.check:
        settings["checks"] = args.check
    try:
        config = RunConfig(**{k: v for k, v in settings.items()
                              if k in RunConfig.__dataclass_fields__})
        config.validate()
    except (TypeError, ValueError) as exc:
        parser.error(str(exc))
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
