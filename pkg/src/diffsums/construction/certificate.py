"""JSON certificates for stage-1 trees and inductive steps.

Rationals are written as "num/den" strings. A step's claimed density has a
denominator with millions of digits, so the file keeps its SHA-256 digest
plus a small rational upper bound; loading recomputes the exact value from
the primes and checks the digest.
"""

from __future__ import annotations

import json
from fractions import Fraction
from math import prod

import gmpy2
import numpy as np

from ..setcore import difference_set
from .sieve import primes_above
from .step import (
    SIEVE_LIMIT,
    StepCertificate,
    density_digest,
    exact_claimed_density,
    inner_level_sums,
)
from .tree import MATERIALIZE_LIMIT, Stage1, Step, materialize_set

EXPLICIT_PRIME_LIMIT = 10**6


class CertificateError(ValueError):
    pass


def rat(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rat(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise CertificateError(f"bad rational {text!r}") from None


def stage1_certificate(tree: Stage1, limit: int = MATERIALIZE_LIMIT) -> dict:
    """Materialize the stage-1 set and record its exact checks."""
    a = materialize_set(tree, limit)
    s1 = inner_level_sums(tree, limit)
    q = tree.modulus
    union_bound = sum(q // p for p in tree.primes)
    return {
        "kind": "stage1",
        "k": tree.k,
        "primes": list(tree.primes),
        "delta": rat(tree.delta),
        "modulus": q,
        "set_size": len(a),
        "difference_set_full": difference_set(a).is_full(),
        "level": 1,
        "level_sum_size": len(s1),
        "union_bound": union_bound,
        "density": rat(Fraction(len(s1), q)),
        "accepted": difference_set(a).is_full() and len(s1) <= union_bound and Fraction(len(s1), q) < tree.delta,
    }


def step_certificate(cert: StepCertificate, limit: int = MATERIALIZE_LIMIT) -> dict:
    tree = cert.tree
    primes = tree.step_primes
    pmin = int(primes.min()) if primes.size else 1
    inner_density = Fraction(len(inner_level_sums(tree.inner, limit)), tree.inner.modulus)
    record = {
        "threshold": rat(tree.threshold),
        "count": int(tree.pair_count),
        "exclude_divisors_of": tree.inner.modulus,
        "min": pmin,
        "max": int(primes.max()) if primes.size else 0,
    }
    if tree.pair_count <= EXPLICIT_PRIME_LIMIT:
        record["list"] = primes.tolist()
    claimed = cert.claimed_density
    return {
        "kind": "step",
        "k": tree.k,
        "level": tree.level,
        "inner": stage1_certificate(tree.inner, limit),
        "pair_count": int(tree.pair_count),
        "delta": rat(tree.delta),
        "delta_prime": rat(tree.delta_prime),
        "primes": record,
        "claimed_density": {
            "sha256": density_digest(claimed),
            "upper_bound": rat(inner_density + Fraction(tree.pair_count, pmin)),
            "decimal": f"{float(claimed):.15f}",
            "below_delta_prime": bool(claimed < gmpy2.mpq(tree.delta_prime.numerator, tree.delta_prime.denominator)),
        },
        "seed": int(cert.seed),
        "samples": int(cert.verified_samples),
        "violations": int(cert.violations),
        "branch_counts": dict(sorted(cert.branch_counts.items())),
        "accepted": cert.accepted,
    }


def dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"


def loads(text: str) -> dict:
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CertificateError(f"not a certificate: {exc}") from None
    if record.get("kind") not in ("stage1", "step"):
        raise CertificateError("certificate kind must be 'stage1' or 'step'")
    return record


def tree_from_certificate(record: dict, sieve_limit: int = SIEVE_LIMIT) -> Stage1 | Step:
    """Rebuild the tree; step primes come from the explicit list or are
    regenerated from the recorded sieve parameters."""
    if record["kind"] == "stage1":
        tree = Stage1(int(record["k"]), tuple(int(p) for p in record["primes"]), parse_rat(record["delta"]))
        if "modulus" in record and record["modulus"] != prod(tree.primes):
            raise CertificateError("stage-1 modulus does not match its primes")
        return tree
    inner = tree_from_certificate(record["inner"], sieve_limit)
    pr = record["primes"]
    threshold = parse_rat(pr["threshold"])
    count = int(pr["count"])
    if "list" in pr:
        primes = np.array(pr["list"], dtype=np.int64)
    else:
        primes = primes_above(threshold, count, exclude_divisors_of=int(pr["exclude_divisors_of"]), limit=sieve_limit)
    if len(primes) != count or count != int(record["pair_count"]):
        raise CertificateError("prime count does not match pair count")
    if count and int(primes.min()) <= threshold:
        raise CertificateError("step prime below recorded threshold")
    inner_density = Fraction(len(inner_level_sums(inner)), inner.modulus)
    claimed = exact_claimed_density(inner_density, primes)
    expected = record.get("claimed_density", {}).get("sha256")
    if expected is not None and density_digest(claimed) != expected:
        raise CertificateError("claimed density digest mismatch")
    return Step(
        inner,
        count,
        primes,
        int(record["level"]),
        parse_rat(record["delta"]),
        parse_rat(record["delta_prime"]),
        threshold,
        claimed,
    )
