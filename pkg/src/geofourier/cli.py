"""Command-line entry points: verify-convolution, basis, transform, selftest.

Exit codes: 0 pass, 1 numerical failure, 2 bad configuration or input,
3 a mathematical hypothesis does not hold (e.g. blades not coorthogonal).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from .algebra import CliffordError, Signature
from .blades import FactoredBlade, NotCoorthogonal, NotRepresentable, NullVector, coorthogonal_basis
from .checks import all_checks
from .convolution import Variant, verify
from .decomposition import FlagViolation, ShapeKind
from .fields import FrequencySet, SampledField, SchemaError, load_json
from .phases import UnsupportedSignature, build
from .transforms import GTTSpec, gtt_forward

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_HYPOTHESIS = 0, 1, 2, 3
MAX_GRID = 16
MAX_M = 4
MAX_POINTS = 1024


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    transform: str
    algebra: tuple[int, int] | None
    grid: int
    variants: tuple[str, ...]
    seed: int
    tol: float
    nfreq: int
    fmt: str
    output: str | None


def _parse_algebra(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    try:
        p, q = (int(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"--algebra expects 'p,q', got {text!r}") from None
    if p < 0 or q < 0 or not 1 <= p + q <= 8:
        raise ConfigError(f"--algebra {text}: need 1 <= p+q <= 8")
    return p, q


def _parse_variants(text: str) -> tuple[str, ...]:
    if text == "all":
        return tuple(v.name for v in Variant)
    out = []
    for item in text.split(","):
        item = item.strip()
        if item in ("around-C", "around-B"):
            out.append(item)
            continue
        try:
            out.append(Variant.parse(item).name)
        except (KeyError, ValueError):
            raise ConfigError(f"unknown variant {item!r}") from None
    return tuple(out)


def _spec_for(name: str, algebra: tuple[int, int] | None):
    n = sum(algebra) if algebra else None
    spec = build(name, n)
    if algebra is not None and (spec.sig.p, spec.sig.q) != algebra:
        raise UnsupportedSignature(f"{name} lives in G({spec.sig.p},{spec.sig.q}), not G{algebra}")
    return spec


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_verify_convolution(args) -> int:
    cfg = RunConfig(args.transform, _parse_algebra(args.algebra), args.grid,
                    _parse_variants(args.variant), args.seed, args.tol, args.freqs,
                    args.format, args.output)
    if not 1 <= cfg.grid <= MAX_GRID:
        raise ConfigError(f"--grid must be in 1..{MAX_GRID}")
    if cfg.nfreq < 1:
        raise ConfigError("--freqs must be positive")
    spec = _spec_for(cfg.transform, cfg.algebra)
    if spec.m > MAX_M or cfg.grid ** spec.m > MAX_POINTS:
        raise ConfigError(f"grid {cfg.grid}^{spec.m} exceeds {MAX_POINTS} points")
    rng = np.random.default_rng(cfg.seed)
    c = SampledField.random(spec.sig, spec.m, cfg.grid, rng)
    b = SampledField.random(spec.sig, spec.m, cfg.grid, rng)
    freqs = FrequencySet.random(spec.m, cfg.nfreq, rng)
    report = verify(c, b, spec, cfg.variants, freqs, cfg.tol)
    _emit(report.dumps(cfg.fmt), cfg.output)
    print(f"{spec.name}: max deviation {report.max_dev:.3e} "
          f"({'pass' if report.passed else 'FAIL'} at tol {cfg.tol:g})", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def _read_blades(obj: dict) -> list[FactoredBlade]:
    try:
        sig = Signature.from_json(obj["sig"])
        out = []
        for b in obj["blades"]:
            # either a bare list of vectors or {"vectors": [...], "scale": s}
            vectors, scale = (b, 1.0) if isinstance(b, list) else (b["vectors"], b.get("scale", 1.0))
            out.append(FactoredBlade(sig, np.array(vectors, dtype=float).reshape(-1, sig.n), float(scale)))
        return out
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad blade list: {exc}") from exc


def cmd_basis(args) -> int:
    blades = _read_blades(load_json(args.input))
    result = coorthogonal_basis(blades)
    out = result.to_json()
    out["reconstruction_error"] = max(
        (result.reconstruct(k) - b.expand()).norm_inf() for k, b in enumerate(blades))
    _emit(json.dumps(out, indent=2, sort_keys=True) + "\n", args.output)
    return EXIT_OK


def cmd_transform(args) -> int:
    field = SampledField.from_json(load_json(args.field))
    freqs = FrequencySet.from_json(load_json(args.freqs))
    algebra = _parse_algebra(args.algebra)
    if algebra is None and args.transform in ("clifford", "sommen_bulow", "cylindrical"):
        algebra = (field.sig.p, field.sig.q)
    spec = _spec_for(args.transform, algebra)
    if field.sig != spec.sig or field.m != spec.m or freqs.m != spec.m:
        raise SchemaError(f"field/frequencies do not match {spec.name} ({spec.sig}, m={spec.m})")
    shapes = [ShapeKind.FULL] * spec.nu
    if args.shapes:
        try:
            shapes = [ShapeKind(s.strip()) for s in args.shapes.split(",")]
        except ValueError:
            raise ConfigError(f"--shapes entries must be one of {[k.value for k in ShapeKind]}") from None
        if len(shapes) != spec.nu:
            raise ConfigError(f"--shapes needs {spec.nu} entries")
    gtt = GTTSpec.from_gft(spec, shapes[:spec.mu], shapes[spec.mu:])
    spectrum = gtt_forward(field, gtt, freqs)
    out = spectrum.to_json()
    out["spec"] = spec.name
    _emit(json.dumps(out, indent=2, sort_keys=True) + "\n", args.output)
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = all_checks(args.seed, args.quick)
    if args.tol is not None:
        for r in results:
            r.tol = args.tol
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geofourier",
                                     description="Geometric Fourier transforms and convolution checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-convolution", help="check the convolution theorem on random fields")
    p.add_argument("--transform", required=True,
                   help="clifford, sommen_bulow, quaternionic, spacetime, color_image or cylindrical")
    p.add_argument("--algebra", help="signature 'p,q'; fixes n for clifford/sommen_bulow/cylindrical")
    p.add_argument("--grid", type=int, default=4, help="field extent per axis (default 4)")
    p.add_argument("--variant", default="all", help="'all' or a comma list of V1..V8, around-C, around-B")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--freqs", type=int, default=16, help="number of random test frequencies")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", help="report path (default stdout)")
    p.set_defaults(func=cmd_verify_convolution)

    p = sub.add_parser("basis", help="coorthogonal basis of a blade list")
    p.add_argument("input", help="JSON {'sig': [p, q], 'blades': [[vector, ...], ...]}")
    p.add_argument("--output")
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("transform", help="apply a catalogue transform to a field")
    p.add_argument("--field", required=True)
    p.add_argument("--freqs", required=True)
    p.add_argument("--transform", required=True)
    p.add_argument("--algebra")
    p.add_argument("--shapes", help="comma list of full|cosine|sine|zero per factor (F1 then F2)")
    p.add_argument("--output")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("selftest", help="run every property suite")
    p.add_argument("--quick", action="store_true", help="only algebras with n <= 3")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, help="override every tolerance")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotCoorthogonal as exc:
        print(f"error: blades {exc.pair[0] + 1} and {exc.pair[1] + 1} are not coorthogonal",
              file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (FlagViolation, NotRepresentable, NullVector) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (ConfigError, SchemaError, UnsupportedSignature, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CliffordError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS


if __name__ == "__main__":
    sys.exit(main())
