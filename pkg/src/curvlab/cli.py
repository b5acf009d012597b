"""Command line interface.

Exit codes: 0 success, 1 invalid input or usage, 2 an inequality was
falsified (or a reproduction did not match its expected value).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from .errors import CertificationError, ValidationError
from .graph_core import graph_from_json
from .graph_curvature import (
    GeFalsifyConfig,
    GeSearchConfig,
    bakry_emery_curvature,
    ge_curvature_search,
    ge_falsify,
    idle_hodge,
    intertwining_curvature,
    splitting_hodge,
)
from .mapping_rep import intertwining_curvature_mapping, mapping_from_json, mapping_hodge
from .means import MEAN_NAMES
from .optimize import DEFAULT_TRUNCATION, SearchConfig
from .qms_core import Fodc, family_generator, fodc, gns_residual, is_completely_positive, qms_from_json, semigroup
from .qms_curvature import (
    be_curvature_qms,
    certify_qms_hodge,
    ge_derivative_infimum,
    ge_falsify_qms,
    intertwining_curvature_qms,
    mlsi_falsify,
    product_hodge,
    splitting_hodge_qms,
)
from .report import CurvatureReport, decode_complex_matrix
from .reproduce import CASES, reproduce

EXIT_OK, EXIT_INVALID, EXIT_FALSIFIED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    seed: int = 0
    samples: int = 1000
    tol: float = 1e-9
    mean: str = "logarithmic"
    output: str | None = None

    def __post_init__(self):
        if self.samples < 1:
            raise ValidationError("--samples must be at least 1")
        if not self.tol > 0:
            raise ValidationError("--tol must be positive")


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON ({exc.msg})") from None


def _common(p, samples=1000):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=samples)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="curvlab", description="Curvature bounds for graphs and quantum Markov semigroups.")
    top = parser.add_subparsers(dest="area", required=True, parser_class=_Parser)

    graph = top.add_parser("graph", help="weighted graphs")
    gsub = graph.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = gsub.add_parser("be", help="Bakry-Emery curvature")
    p.add_argument("graph")
    p.add_argument("--truncation", type=float, default=DEFAULT_TRUNCATION)
    _common(p)
    p = gsub.add_parser("intertwine", help="intertwining curvature")
    p.add_argument("graph")
    p.add_argument("--hodge", default="idle", help="idle | splitting:<K>")
    p.add_argument("--field", choices=("auto", "real", "complex"), default="auto")
    p.add_argument("--truncation", type=float, default=DEFAULT_TRUNCATION)
    _common(p)
    p = gsub.add_parser("mapping", help="intertwining curvature from a mapping representation")
    p.add_argument("graph")
    p.add_argument("mapping")
    p.add_argument("--variant", choices=("commuting", "involutive"), default="commuting")
    p.add_argument("--K", type=float, default=None)
    _common(p)
    p = gsub.add_parser("ge", help="gradient estimate search or falsification")
    p.add_argument("graph")
    p.add_argument("--mean", choices=MEAN_NAMES, default="logarithmic")
    p.add_argument("--falsify", type=float, default=None, metavar="K", help="look for violations of GE(K)")
    _common(p)

    qms = top.add_parser("qms", help="quantum Markov semigroups")
    qsub = qms.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = qsub.add_parser("validate", help="check Alicki conditions and semigroup properties")
    p.add_argument("qms")
    _common(p)
    p = qsub.add_parser("be", help="Bakry-Emery curvature (sampled)")
    p.add_argument("qms")
    _common(p, samples=512)
    p = qsub.add_parser("intertwine", help="intertwining curvature (sampled)")
    p.add_argument("qms")
    p.add_argument("--hodge", default="splitting:0.5", help="splitting:<K> | product[:K1,K2,...] | file:<matrix.json>")
    _common(p, samples=512)
    p = qsub.add_parser("ge", help="gradient estimate falsification")
    p.add_argument("qms")
    p.add_argument("--mean", choices=MEAN_NAMES, default="logarithmic")
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--estimate", action="store_true", help="also report the sampled t=0 derivative infimum")
    _common(p)
    p = qsub.add_parser("mlsi", help="entropy decay falsification")
    p.add_argument("qms")
    p.add_argument("--rate", type=float, required=True, help="decay rate 2K")
    _common(p)

    p = top.add_parser("reproduce", help="run a bundled reproduction case")
    p.add_argument("case", choices=sorted(CASES))
    _common(p)
    return parser


def _config(args) -> RunConfig:
    return RunConfig(seed=args.seed, samples=args.samples, tol=args.tol, mean=getattr(args, "mean", "logarithmic"), output=args.output)


def _parse_hodge_spec(spec: str):
    name, _, arg = spec.partition(":")
    return name, arg


def _graph(args, cfg):
    g = graph_from_json(_load_json(args.graph))
    code = EXIT_OK
    if args.command == "be":
        rep = bakry_emery_curvature(g, args.truncation)
    elif args.command == "intertwine":
        name, arg = _parse_hodge_spec(args.hodge)
        if name == "idle":
            hodge = idle_hodge(g)
        elif name == "splitting":
            try:
                hodge = splitting_hodge(g, float(arg))
            except ValueError:
                raise ValidationError(f"--hodge splitting needs a number, got {arg!r}") from None
        else:
            raise ValidationError(f"unknown graph Hodge construction {name!r}")
        rep = intertwining_curvature(g, hodge, args.truncation, args.field)
    elif args.command == "mapping":
        mr = mapping_from_json(g, _load_json(args.mapping))
        rep = intertwining_curvature_mapping(mr, mapping_hodge(mr, args.variant, args.K))
    else:
        if args.falsify is None:
            rep = ge_curvature_search(g, args.mean, GeSearchConfig(samples=cfg.samples, seed=cfg.seed))
        else:
            found = ge_falsify(g, args.mean, args.falsify, GeFalsifyConfig(samples=cfg.samples, seed=cfg.seed, tol=cfg.tol))
            rep = CurvatureReport(
                "ge_falsify",
                args.falsify,
                {},
                None if found is None else found.to_dict(),
                "sampled",
                samples=cfg.samples,
                seed=cfg.seed,
                tolerances={"relative": cfg.tol},
                details={"mean": args.mean, "holds": found is None},
            )
            code = EXIT_OK if found is None else EXIT_FALSIFIED
    return rep, code


def _qms_hodge(gen, spec):
    name, arg = _parse_hodge_spec(spec)
    calc = Fodc(gen)
    try:
        if name == "splitting":
            return splitting_hodge_qms(calc, float(arg))
        if name == "product":
            if arg:
                ks = [float(k) for k in arg.split(",")]
            else:
                ks = [_spectral_gap(family_generator(gen, k)) for k in range(len(gen.families))]
            if len(ks) != len(gen.families):
                raise ValidationError("product Hodge needs one K per family")
            hodges = [splitting_hodge_qms(Fodc(family_generator(gen, k)), ks[k]) for k in range(len(ks))]
            return product_hodge(gen, hodges)
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad Hodge argument {spec!r}") from None
    if name == "file":
        mat = decode_complex_matrix(_load_json(arg))
        hodge = certify_qms_hodge(calc, mat, "custom")
        if not hodge.certified:
            raise CertificationError("Hodge matrix from file failed certification")
        return hodge
    raise ValidationError(f"unknown QMS Hodge construction {name!r}")


def _spectral_gap(gen) -> float:
    eig = np.sort(np.linalg.eigvals(gen.superoperator).real)
    pos = eig[eig > 1e-10]
    return float(pos[0]) if pos.size else 0.0


def _qms(args, cfg):
    gen = qms_from_json(_load_json(args.qms))
    search = SearchConfig(samples=cfg.samples, seed=cfg.seed)
    code = EXIT_OK
    if args.command == "validate":
        fodc(gen)
        cp = all(is_completely_positive(semigroup(gen, t), gen.n) for t in (0.1, 1.0))
        rep = CurvatureReport(
            "qms_validate",
            _spectral_gap(gen),
            {},
            None,
            "exact_pencil",
            tolerances={"certification": 1e-10},
            details={"n": gen.n, "jumps": gen.d, "gns_residual": gns_residual(gen), "completely_positive": cp, "families": [list(f) for f in gen.families]},
        )
    elif args.command == "be":
        rep = be_curvature_qms(gen, search)
    elif args.command == "intertwine":
        rep = intertwining_curvature_qms(_qms_hodge(gen, args.hodge), search)
    elif args.command == "ge":
        res = ge_falsify_qms(gen, args.mean, args.K, samples=cfg.samples, seed=cfg.seed)
        details = {"mean": args.mean, "holds": res.holds, "checked": res.checked}
        if args.estimate:
            details["derivative_infimum"] = ge_derivative_infimum(gen, args.mean, samples=cfg.samples, seed=cfg.seed).bound
        rep = CurvatureReport(
            "qms_ge_check",
            args.K,
            {},
            None if res.violation is None else res.violation.to_dict(),
            "sampled",
            samples=cfg.samples,
            seed=cfg.seed,
            tolerances={"relative": 1e-9, "absolute": 1e-12},
            details=details,
        )
        code = EXIT_OK if res.holds else EXIT_FALSIFIED
    else:
        res = mlsi_falsify(gen, args.rate, samples=cfg.samples, seed=cfg.seed)
        rep = CurvatureReport(
            "qms_mlsi_check",
            args.rate,
            {},
            None if res.violation is None else res.violation.to_dict(),
            "sampled",
            samples=cfg.samples,
            seed=cfg.seed,
            tolerances={"relative": 1e-9, "absolute": 1e-12},
            details={"holds": res.holds, "checked": res.checked},
        )
        code = EXIT_OK if res.holds else EXIT_FALSIFIED
    return rep, code


def run(argv=None, stdout=None, stderr=None) -> int:
    """Parse ``argv``, run the command, emit the JSON report; return the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        cfg = _config(args)
        if args.area == "graph":
            rep, code = _graph(args, cfg)
        elif args.area == "qms":
            rep, code = _qms(args, cfg)
        else:
            result = reproduce(args.case, samples=cfg.samples, seed=cfg.seed)
            print(result.line(), file=stderr)
            rep, code = result.report(), (EXIT_OK if result.passed else EXIT_FALSIFIED)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INVALID
    except (ValidationError, CertificationError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INVALID
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        # Well-formed JSON whose shape does not match the expected input.
        print(f"error: invalid input ({type(exc).__name__}: {exc})", file=stderr)
        return EXIT_INVALID
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    text = rep.to_json()
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text, file=stdout)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
