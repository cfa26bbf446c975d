"""Command line: ``homdist {run,audit,list-scenarios,export-paths}``.

Exit codes: 0 pass, 2 audit failure, 3 configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from ..errors import AuditError, ConfigurationError, HomdistError
from .config import bundled_names, bundled_text, load_config, parse_config_text
from .runner import export_paths, run_scenario

EXIT_OK = 0
EXIT_AUDIT = 2
EXIT_CONFIG = 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="homdist", description="Homotopic-distance planners and audits.")
    sub = p.add_subparsers(dest="verb", required=True)
    for verb, text in (("run", "build, audit and export a scenario"),
                       ("audit", "build and audit a scenario without writing files"),
                       ("export-paths", "write one exemplar path per planner piece")):
        s = sub.add_parser(verb, help=text)
        s.add_argument("config", help="scenario file or bundled scenario name")
        s.add_argument("--seed", type=int, default=None)
        s.add_argument("--samples", type=int, default=None)
        s.add_argument("--out", default=None, help="output directory")
    sub.add_parser("list-scenarios", help="list bundled scenarios")
    return p


def _summary(rep, stream):
    d = rep.data
    for b in d.get("bounds", []):
        ref = "" if b["reference_value"] is None else f" (reference {b['reference_value']}, {b['reference_provenance']})"
        print(f"bound: D <= {b['upper_bound']}; {b.get('arithmetic', '')}{ref}", file=stream)
    for name, a in sorted(d.get("audits", {}).items()):
        if isinstance(a, dict) and "ok" in a:
            print(f"audit {name}: {'ok' if a['ok'] else 'FAILED'}", file=stream)
    if "detection" in d:
        det = d["detection"]
        print(f"detected {det['detected']} separation points, hausdorff {det['hausdorff']:.3g}", file=stream)
    for row in d.get("weak_category", []):
        print(f"degree {row['degree']}: weak category {row['value']}", file=stream)
    for f in rep.failures:
        print(f"FAILED {f[0]}: {f[1]}", file=stream)
    print("PASS" if rep.passed else "FAIL", file=stream)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    out = sys.stdout
    try:
        if args.verb == "list-scenarios":
            for name in bundled_names():
                cfg = parse_config_text(bundled_text(name), name)
                print(f"{name}\t{cfg.recipe}\t{cfg.get('description', '')}", file=out)
            return EXIT_OK
        cfg = load_config(args.config).with_overrides(args.seed, args.samples, args.out)
        target = cfg.out or os.path.join("homdist_out", cfg.name)
        cfg = replace(cfg, out=None)
        if args.verb == "run":
            rep = run_scenario(cfg, out=target, strict=False)
            _summary(rep, out)
            print(f"wrote {len(rep.files)} file(s) to {target}", file=out)
        elif args.verb == "audit":
            rep = run_scenario(cfg, out=None, strict=False)
            _summary(rep, out)
        else:
            rep = run_scenario(cfg, out=None, strict=False)
            names = export_paths(rep, target)
            for n in names:
                print(os.path.join(target, n), file=out)
        return EXIT_OK if rep.passed else EXIT_AUDIT
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AuditError as exc:
        print(f"audit failure: {exc}", file=sys.stderr)
        return EXIT_AUDIT
    except HomdistError as exc:
        print(f"audit failure: {exc}", file=sys.stderr)
        return EXIT_AUDIT


if __name__ == "__main__":
    sys.exit(main())
