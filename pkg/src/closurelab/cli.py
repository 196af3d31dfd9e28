"""Command-line harness: manifest-driven experiments with stable outputs.

Every run echoes its manifest into the hashed payload; version, manifest
hash, payload hash and wall-clock metadata live outside it, so payloads
are byte-identical across reruns of the same manifest and seed.

Exit codes: 0 success, 1 validation or I/O error, 2 verification failure,
3 budget refusal.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from . import __version__
from .budgets import (
    BudgetExceeded,
    ClosureLabError,
    DensityTooLow,
    IntegerOverflowGuard,
    VerificationFailure,
    max_group_exponent,
)
from .closure import (
    closedness_exact,
    closedness_sampled,
    groupset_oracle,
    triangle_compose,
)
from .forcing import (
    agreement_profile,
    find_system,
    matrix_pipeline,
    random_factor_tuples,
)
from .gf2 import Subspace, random_subspace, rref, to_hex
from .hamming import (
    LayerSet,
    SliceSet,
    compatibility_fraction,
    counterexample_scenarios,
    fourier_concentration,
    layer_groupset,
    slice_mu_hat,
    standard_basis_multiset,
)
from .spectral import (
    GroupMultiset,
    GroupSet,
    bogolyubov,
    indicator_spectrum,
    mu_hat,
    random_groupset,
    spectral_closedness,
    wht,
)
from .tensor import SimpleSet, Tensor, TensorShape, rank_one_counter, simple_set_size

COMMANDS = (
    "closedness",
    "spectrum",
    "bogolyubov",
    "forcing-pipeline",
    "simple-set",
    "lsystem",
    "counterexample",
    "scenarios",
)

_BUDGET_KEYS = {"max_group_exponent", "max_samples", "witness_budget"}
_OUTPUT_KEYS = {"path", "format"}
_MANIFEST_KEYS = {"command", "params", "seed", "budgets", "output"}


class ManifestError(ClosureLabError):
    pass


@dataclass
class Manifest:
    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    budgets: dict = field(default_factory=dict)
    output: dict | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "Manifest":
        unknown = set(raw) - _MANIFEST_KEYS
        if unknown:
            raise ManifestError(f"unknown manifest keys: {sorted(unknown)}")
        command = raw.get("command")
        if command not in COMMANDS:
            raise ManifestError(f"unknown command {command!r}")
        budgets = raw.get("budgets") or {}
        if set(budgets) - _BUDGET_KEYS:
            raise ManifestError(
                f"unknown budget keys: {sorted(set(budgets) - _BUDGET_KEYS)}"
            )
        output = raw.get("output")
        if output is not None and set(output) - _OUTPUT_KEYS:
            raise ManifestError(
                f"unknown output keys: {sorted(set(output) - _OUTPUT_KEYS)}"
            )
        params = raw.get("params") or {}
        if not isinstance(params, dict):
            raise ManifestError("params must be a mapping")
        return cls(command, params, int(raw.get("seed", 0)), budgets, output)

    def to_dict(self) -> dict:
        out = {
            "command": self.command,
            "params": self.params,
            "seed": self.seed,
            "budgets": self.budgets,
        }
        if self.output is not None:
            out["output"] = self.output
        return out

    def exponent_cap(self) -> int:
        return int(self.budgets.get("max_group_exponent", max_group_exponent()))

    def check_exponent(self, n: int) -> None:
        if n > self.exponent_cap():
            raise BudgetExceeded(
                f"group exponent {n} exceeds budget {self.exponent_cap()}"
            )


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _parse_fraction(value, default: Fraction) -> Fraction:
    if value is None:
        return default
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, (int, float)):
        return Fraction(value).limit_denominator(10**6)
    raise ManifestError(f"cannot parse fraction from {value!r}")


# ---------------------------------------------------------------------------
# set / multiset builders shared by several commands
# ---------------------------------------------------------------------------


def build_groupset(n: int, spec: dict, rng) -> GroupSet:
    kind = spec.get("kind", "random")
    if kind == "middle-layers":
        if n % 2 == 0:
            raise ManifestError("middle-layers needs odd n")
        half = (n - 1) // 2
        return layer_groupset(n, half, half + 1)
    if kind == "layers":
        return layer_groupset(n, int(spec["lo"]), int(spec["hi"]))
    if kind == "random":
        size = int(spec.get("size", (1 << n) // 2))
        return random_groupset(n, size, rng)
    if kind == "explicit":
        return GroupSet.from_elements(n, [int(v, 16) for v in spec["elements"]])
    raise ManifestError(f"unknown set kind {kind!r}")


def build_multiset(n: int, spec: dict, rng) -> GroupMultiset:
    kind = spec.get("kind", "basis")
    if kind == "basis":
        support = spec.get("support")
        return standard_basis_multiset(n, None if support is None else int(support))
    if kind == "rank-one":
        dims = tuple(int(d) for d in spec["dims"])
        if math.prod(dims) != n:
            raise ManifestError("rank-one dims do not multiply to n")
        counter = rank_one_counter(TensorShape(dims), bool(spec.get("nonzero", False)))
        return GroupMultiset.from_counter(n, counter)
    if kind == "random":
        size = int(spec.get("support_size", 8))
        max_mult = int(spec.get("max_mult", 3))
        elems = rng.choice(1 << n, size=size, replace=False)
        return GroupMultiset.from_pairs(
            n, [(int(e), int(rng.integers(1, max_mult + 1))) for e in elems]
        )
    if kind == "explicit":
        return GroupMultiset.from_pairs(
            n, [(int(e, 16), int(m)) for e, m in spec["pairs"]]
        )
    raise ManifestError(f"unknown multiset kind {kind!r}")


# ---------------------------------------------------------------------------
# command handlers: manifest -> (payload dict, ok flag)
# ---------------------------------------------------------------------------


def cmd_closedness(manifest: Manifest):
    p = manifest.params
    n = int(p["n"])
    manifest.check_exponent(n)
    rng = np.random.default_rng(manifest.seed)
    a = build_groupset(n, p.get("set", {}), rng)
    b = build_multiset(n, p.get("generators", {}), rng)
    mode = p.get("mode", "exact")
    if mode == "exact":
        report = closedness_exact(a, b)
        spectral = spectral_closedness(a, b)
        payload = {
            "n": n,
            "set_size": a.size,
            "generators_total": b.total,
            "report": report.to_json(),
            "spectral_eta_num": spectral.numerator,
            "spectral_eta_den": spectral.denominator,
        }
        return payload, report.eta == spectral
    if mode == "sampled":
        samples = int(p.get("samples", 10**4))
        cap = int(manifest.budgets.get("max_samples", 10**8))
        if samples > cap:
            raise BudgetExceeded(f"samples {samples} exceed budget {cap}")
        member, sampler = groupset_oracle(a)
        report = closedness_sampled(
            member, sampler, b, samples, manifest.seed,
            radius_method=p.get("radius_method", "hoeffding"),
        )
        return {"n": n, "set_size": a.size, "report": report.to_json()}, True
    raise ManifestError(f"unknown closedness mode {mode!r}")


def cmd_spectrum(manifest: Manifest):
    p = manifest.params
    n = int(p["n"])
    manifest.check_exponent(n)
    rng = np.random.default_rng(manifest.seed)
    a = build_groupset(n, p.get("set", {}), rng)
    spec = indicator_spectrum(a)
    rows = [
        {"r": to_hex(r, n), "coefficient": int(spec.coeffs[r])}
        for r in range(1 << n)
    ]
    return {"n": n, "set_size": a.size, "rows": rows}, True


def cmd_bogolyubov(manifest: Manifest):
    p = manifest.params
    n = int(p["n"])
    manifest.check_exponent(n)
    rng = np.random.default_rng(manifest.seed)
    a = build_groupset(n, p.get("set", {"kind": "random"}), rng)
    space = bogolyubov(a)  # verified internally; failure raises
    payload = {
        "n": n,
        "set_size": a.size,
        "density_num": a.density.numerator,
        "density_den": a.density.denominator,
        "codim": space.codim,
        "rows": [{"basis_row": h} for h in space.to_rows_hex()],
        "verified": True,
    }
    return payload, True


def cmd_forcing_pipeline(manifest: Manifest):
    p = manifest.params
    dims = tuple(int(d) for d in p.get("shape", (4, 4)))
    shape = TensorShape(dims)
    manifest.check_exponent(shape.total)
    witness_budget = int(manifest.budgets.get("witness_budget", 2**24))
    if (1 << shape.total) > witness_budget:
        raise BudgetExceeded("witness search space exceeds witness_budget")
    delta = _parse_fraction(p.get("delta"), Fraction(1, 2))
    epsilon = _parse_fraction(p.get("epsilon"), Fraction(1, 32))
    rank_threshold = int(p.get("rank_threshold", 1))
    rng = np.random.default_rng(manifest.seed)
    count = int(p.get("pairs", math.ceil(delta * (1 << sum(dims)))))
    pairs = random_factor_tuples(dims, count, rng)
    result = matrix_pipeline(pairs, shape, delta, epsilon, rank_threshold)
    counts = agreement_profile(result.q, shape).counts
    values, freqs = np.unique(counts, return_counts=True)
    histogram = [
        {"agreement": int(v), "arrays": int(f)} for v, f in zip(values, freqs)
    ]
    payload = {
        "shape": list(dims),
        "delta": str(delta),
        "epsilon": str(epsilon),
        "rank_threshold": rank_threshold,
        "pairs": count,
        "verified": result.verified,
        "counterexample": result.counterexample,
        "measured": result.measured,
        "w1_rows": result.w1.to_rows_hex(),
        "w2_rows": result.w2.to_rows_hex(),
        "num_witnessed_pairs": len(result.structure.witnesses),
        "rows": histogram,
    }
    return payload, result.verified


def cmd_simple_set(manifest: Manifest):
    p = manifest.params
    dims = tuple(int(d) for d in p.get("shape", (3, 3)))
    shape = TensorShape(dims)
    manifest.check_exponent(shape.total)
    k = int(p.get("k", 1))
    rng = np.random.default_rng(manifest.seed)
    spaces = {}
    d = shape.d
    for mask in range(1, 1 << d):
        axes = tuple(a for a in range(d) if (mask >> a) & 1)
        amb = math.prod(dims[a] for a in axes)
        codim = int(rng.integers(0, min(k, amb) + 1))
        spaces[axes] = random_subspace(amb, amb - codim, rng)
    translate = Tensor(shape, int(rng.integers(0, 1 << shape.total)))
    simple = SimpleSet(shape, translate, spaces)
    size = simple_set_size(simple)
    ok = True
    if shape.total <= 12:
        members = sum(
            1
            for x in range(1 << shape.total)
            if simple.member(Tensor(shape, x))
        )
        ok = members == size
    payload = {
        "shape": list(dims),
        "k": k,
        "simplicity": simple.simplicity,
        "size": size,
        "membership_check": ok,
        "definition": simple.to_json(),
    }
    return payload, ok


def cmd_lsystem(manifest: Manifest):
    p = manifest.params
    dims = tuple(int(d) for d in p.get("shape", (4, 4)))
    shape = TensorShape(dims)
    manifest.check_exponent(shape.total)
    delta = _parse_fraction(p.get("delta"), Fraction(1, 2))
    rng = np.random.default_rng(manifest.seed)
    count = int(p.get("tuples", math.ceil(delta * (1 << sum(dims)))))
    tuples = random_factor_tuples(dims, count, rng)
    result = find_system(tuples, shape, delta)
    payload = {
        "shape": list(dims),
        "delta": str(delta),
        "tuples": count,
        "root_codim": result.system.root.codim,
        "max_codim": result.system.max_codim(),
        "declared_bound": result.system.bound,
        "sumset_depth": result.sumset_depth,
        "elements": sum(result.system.element_counter().values()),
        "verified": result.witnesses is not None,
    }
    return payload, True


def cmd_counterexample(manifest: Manifest):
    p = manifest.params
    mode = p.get("mode", "compatibility")
    if mode == "compatibility":
        ns = [int(v) for v in p.get("ns", (36, 49, 64))]
        c = float(p.get("c", 0.1))
        samples = int(p.get("samples", 10**5))
        cap = int(manifest.budgets.get("max_samples", 10**8))
        if samples > cap:
            raise BudgetExceeded(f"samples {samples} exceed budget {cap}")
        rows = []
        for n in ns:
            w = round(math.sqrt(n))  # exact on the perfect-square test grid
            layer = LayerSet.below_cutoff(n, c)
            rep = compatibility_fraction(layer, SliceSet(n, w), samples, manifest.seed)
            rows.append(
                {
                    "n": n,
                    "constant": c,
                    "estimate": rep.estimate,
                    "ci_lo": rep.estimate - rep.radius,
                    "ci_hi": rep.estimate + rep.radius,
                }
            )
        return {"mode": mode, "samples": samples, "rows": rows}, True
    if mode == "concentration":
        n = int(p["n"])
        w = int(p["w"])
        threshold = _parse_fraction(p.get("threshold"), Fraction(98, 100))
        res = fourier_concentration(SliceSet(n, w), threshold)
        rows = []
        for uw in res.members:
            value = slice_mu_hat(n, w, uw)
            rows.append(
                {
                    "u_weight": uw,
                    "mu_hat_num": value.numerator,
                    "mu_hat_den": value.denominator,
                    "multiplicity": math.comb(n, uw),
                }
            )
        payload = {
            "mode": mode,
            "n": n,
            "w": w,
            "threshold": str(threshold),
            "count": res.count,
            "rows": rows,
        }
        return payload, True
    raise ManifestError(f"unknown counterexample mode {mode!r}")


def cmd_scenarios(manifest: Manifest):
    p = manifest.params
    rows = counterexample_scenarios(
        two_layer_ns=tuple(int(v) for v in p.get("two_layer_ns", (5, 7, 9, 11))),
        third_n=int(p.get("third_n", 15)),
        translate_n=int(p.get("translate_n", 12)),
        translate_seed=int(p.get("translate_seed", manifest.seed or 7)),
        window_n=int(p.get("window_n", 17)),
        window_m=int(p.get("window_m", 13)),
    )
    ok = all(row.passed is not False for row in rows)
    return {"rows": [row.to_json() for row in rows], "all_passed": ok}, ok


_HANDLERS = {
    "closedness": cmd_closedness,
    "spectrum": cmd_spectrum,
    "bogolyubov": cmd_bogolyubov,
    "forcing-pipeline": cmd_forcing_pipeline,
    "simple-set": cmd_simple_set,
    "lsystem": cmd_lsystem,
    "counterexample": cmd_counterexample,
    "scenarios": cmd_scenarios,
}


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------


def selftest(seed: int = 0) -> dict:
    """Exact-identity suite at n <= 10; every check must pass."""
    rng = np.random.default_rng(seed)
    checks = []

    def record(name, fn):
        try:
            ok, detail = fn()
        except ClosureLabError as exc:
            ok, detail = False, str(exc)
        checks.append({"name": name, "ok": bool(ok), "detail": detail})

    def check_parseval_and_involution():
        for n in range(1, 9):
            f = rng.integers(-4, 5, size=1 << n).astype(np.int64)
            spec = wht(f.tolist())  # Parseval asserted inside
            back = wht(spec.coeffs.tolist())
            if not np.array_equal(back.coeffs, (1 << n) * f):
                return False, f"involution failed at n={n}"
        return True, "parseval + involution, n <= 8"

    def check_subspace_measure():
        for _ in range(20):
            n = int(rng.integers(1, 9))
            w = random_subspace(n, int(rng.integers(0, n + 1)), rng)
            spec = mu_hat(GroupMultiset.from_elements(n, w.enumerate()))
            dual = w.complement()
            for r in range(1 << n):
                expect = 1 if dual.contains(r) else 0
                if spec.value(r) != expect:
                    return False, f"mu_hat mismatch at n={n}, r={r}"
        return True, "mu_hat of 20 random subspaces"

    def check_spectral_equals_counting():
        for _ in range(20):
            n = int(rng.integers(2, 11))
            a = random_groupset(n, int(rng.integers(1, (1 << n) + 1)), rng)
            size = min(6, 1 << n)
            elems = rng.choice(1 << n, size=size, replace=False)
            b = GroupMultiset.from_pairs(
                n, [(int(e), int(rng.integers(1, 4))) for e in elems]
            )
            if closedness_exact(a, b).eta != spectral_closedness(a, b):
                return False, f"closedness mismatch at n={n}"
        return True, "spectral = combinatorial on 20 instances"

    def check_triangle():
        for _ in range(30):
            n = 10
            a = random_groupset(n, int(rng.integers(1, 1 << n)), rng)
            triangle_compose(
                a, int(rng.integers(0, 1 << n)), int(rng.integers(0, 1 << n))
            )  # raises on violation
        return True, "triangle deficits on 30 triples"

    record("parseval_involution", check_parseval_and_involution)
    record("subspace_measure", check_subspace_measure)
    record("spectral_equals_counting", check_spectral_equals_counting)
    record("triangle_deficits", check_triangle)
    return {
        "seed": seed,
        "checks": checks,
        "all_ok": all(c["ok"] for c in checks),
    }


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------


def _atomic_write(path: str, data: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".closurelab-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\r\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def emit(manifest: Manifest, payload: dict, elapsed: float) -> str:
    payload = dict(payload)
    echoed = manifest.to_dict()
    echoed.pop("output", None)  # destination is not an experiment input
    payload["manifest"] = echoed
    canon = canonical_json(payload)
    meta = {
        "tool": "closurelab",
        "version": __version__,
        "manifest_hash": _sha256(canonical_json(manifest.to_dict())),
        "payload_hash": _sha256(canon),
        "wall_clock_utc": datetime.now(timezone.utc).isoformat(),
        "elapsed_s": round(elapsed, 6),
    }
    out_format = (manifest.output or {}).get("format", "json")
    out_path = (manifest.output or {}).get("path")
    if out_format == "json":
        text = json.dumps({"meta": meta, "payload": payload}, sort_keys=True, indent=1)
        if out_path:
            _atomic_write(out_path, text + "\n")
        return text
    if out_format == "csv":
        rows = payload.get("rows")
        if not rows:
            raise ManifestError("csv output needs a command that produces rows")
        text = _csv_text(rows)
        if out_path:
            _atomic_write(out_path, text)
            _atomic_write(
                out_path + ".meta.json",
                json.dumps({"meta": meta, "payload_sans_rows": {
                    k: v for k, v in payload.items() if k != "rows"
                }}, sort_keys=True, indent=1) + "\n",
            )
        return text
    raise ManifestError(f"unknown output format {out_format!r}")


def run(manifest: Manifest, quiet: bool = False) -> int:
    """Dispatch one experiment; returns the process exit code."""
    handler = _HANDLERS.get(manifest.command)
    if handler is None:
        print(f"error: unknown command {manifest.command!r}", file=sys.stderr)
        return 1
    start = time.monotonic()
    try:
        payload, ok = handler(manifest)
    except (BudgetExceeded, IntegerOverflowGuard) as exc:
        print(f"budget refusal: {exc}", file=sys.stderr)
        return 3
    except (VerificationFailure, DensityTooLow) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 2
    except (ManifestError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        text = emit(manifest, payload, time.monotonic() - start)
    except (OSError, ManifestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not quiet and not (manifest.output or {}).get("path"):
        print(text)
    elif not quiet:
        print(f"wrote {(manifest.output or {}).get('path')}", file=sys.stderr)
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(sub):
    sub.add_argument("--manifest", help="JSON manifest path (flags override)")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--workers", type=int, default=1,
                     help="accepted for interface stability; execution is sequential")
    sub.add_argument("--exact", action="store_true",
                     help="refuse any spectrum outside the exact integer range "
                          "(always enforced; flag kept for scripting parity)")
    sub.add_argument("--out", help="output path")
    sub.add_argument("--format", choices=("json", "csv"), default=None)


def _collect(args, command: str, params: dict) -> Manifest:
    base: dict = {"command": command, "params": {}, "seed": 0}
    if args.manifest:
        with open(args.manifest) as fh:
            base = json.load(fh)
        if base.get("command") not in (None, command):
            raise ManifestError(
                f"manifest command {base.get('command')!r} does not match {command!r}"
            )
        base["command"] = command
    manifest = Manifest.from_dict(base)
    for key, value in params.items():
        if value is not None:
            manifest.params[key] = value
    if args.seed is not None:
        manifest.seed = args.seed
    if args.out or args.format:
        out = dict(manifest.output or {})
        if args.out:
            out["path"] = args.out
        if args.format:
            out["format"] = args.format
        manifest.output = out
    return manifest


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="closurelab",
        description="Desk-scale closedness, spectra and forcing experiments "
        "over GF(2) tensor spaces.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("closedness", help="exact or sampled (B,eta)-closedness")
    _add_common(s)
    s.add_argument("--n", type=int)
    s.add_argument("--set-kind", choices=("middle-layers", "layers", "random"))
    s.add_argument("--lo", type=int)
    s.add_argument("--hi", type=int)
    s.add_argument("--set-size", type=int)
    s.add_argument("--generators", choices=("basis", "rank-one", "random"))
    s.add_argument("--mode", choices=("exact", "sampled"))
    s.add_argument("--samples", type=int)

    s = subs.add_parser("spectrum", help="exact integer Walsh spectrum of a set")
    _add_common(s)
    s.add_argument("--n", type=int)
    s.add_argument("--set-kind", choices=("middle-layers", "layers", "random"))
    s.add_argument("--lo", type=int)
    s.add_argument("--hi", type=int)
    s.add_argument("--set-size", type=int)

    s = subs.add_parser("bogolyubov", help="extract a verified subspace of 2S-2S")
    _add_common(s)
    s.add_argument("--n", type=int)
    s.add_argument("--set-size", type=int)

    s = subs.add_parser("forcing-pipeline", help="matrix-case pipeline experiment")
    _add_common(s)
    s.add_argument("--shape", type=int, nargs=2)
    s.add_argument("--delta")
    s.add_argument("--epsilon")
    s.add_argument("--rank-threshold", type=int)

    s = subs.add_parser("simple-set", help="random k-simple set, size and checks")
    _add_common(s)
    s.add_argument("--shape", type=int, nargs="+")
    s.add_argument("--k", type=int)

    s = subs.add_parser("lsystem", help="nested-subspace system from dense tuples")
    _add_common(s)
    s.add_argument("--shape", type=int, nargs="+")
    s.add_argument("--delta")

    s = subs.add_parser("counterexample", help="layer compatibility / concentration")
    _add_common(s)
    s.add_argument("--mode", choices=("compatibility", "concentration"))
    s.add_argument("--ns", type=int, nargs="+")
    s.add_argument("--c", type=float)
    s.add_argument("--samples", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--w", type=int)
    s.add_argument("--threshold")

    s = subs.add_parser("scenarios", help="worked-example closedness table")
    _add_common(s)

    s = subs.add_parser("selftest", help="exact-identity self test")
    s.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)

    if args.command == "selftest":
        report = selftest(args.seed)
        print(json.dumps(report, sort_keys=True, indent=1))
        return 0 if report["all_ok"] else 2

    try:
        if args.command == "closedness":
            params: dict = {"n": args.n, "mode": args.mode, "samples": args.samples}
            if args.set_kind:
                set_spec = {"kind": args.set_kind}
                if args.lo is not None:
                    set_spec["lo"] = args.lo
                if args.hi is not None:
                    set_spec["hi"] = args.hi
                if args.set_size is not None:
                    set_spec["size"] = args.set_size
                params["set"] = set_spec
            if args.generators:
                params["generators"] = {"kind": args.generators}
            manifest = _collect(args, "closedness", params)
        elif args.command == "spectrum":
            params = {"n": args.n}
            if args.set_kind:
                set_spec = {"kind": args.set_kind}
                if args.lo is not None:
                    set_spec["lo"] = args.lo
                if args.hi is not None:
                    set_spec["hi"] = args.hi
                if args.set_size is not None:
                    set_spec["size"] = args.set_size
                params["set"] = set_spec
            manifest = _collect(args, "spectrum", params)
        elif args.command == "bogolyubov":
            params = {"n": args.n}
            if args.set_size is not None:
                params["set"] = {"kind": "random", "size": args.set_size}
            manifest = _collect(args, "bogolyubov", params)
        elif args.command == "forcing-pipeline":
            params = {
                "shape": args.shape,
                "delta": args.delta,
                "epsilon": args.epsilon,
                "rank_threshold": args.rank_threshold,
            }
            manifest = _collect(args, "forcing-pipeline", params)
        elif args.command == "simple-set":
            manifest = _collect(args, "simple-set", {"shape": args.shape, "k": args.k})
        elif args.command == "lsystem":
            manifest = _collect(args, "lsystem", {"shape": args.shape, "delta": args.delta})
        elif args.command == "counterexample":
            params = {
                "mode": args.mode,
                "ns": args.ns,
                "c": args.c,
                "samples": args.samples,
                "n": args.n,
                "w": args.w,
                "threshold": args.threshold,
            }
            manifest = _collect(args, "counterexample", params)
        elif args.command == "scenarios":
            manifest = _collect(args, "scenarios", {})
        else:  # pragma: no cover
            parser.error(f"unhandled command {args.command}")
            return 1
    except (ManifestError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    return run(manifest)


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
