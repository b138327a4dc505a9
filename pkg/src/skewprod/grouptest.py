"""Exact recovery of heavy / nonzero entries of an arbitrary real product.

Every entry (i, j) is treated as the integer i*n + j over a power-of-two n.
Entries are scattered into residue classes modulo many consecutive primes,
all larger than the sparsity budget b, with enough primes that any b entries
are pairwise isolated somewhere.  Within a residue class a majority entry is
identified bit by bit from 2*log2(n) signed counters, then its exact weight
comes from one inner product.

Per prime and outer product the residue histogram is a polynomial product:
scatter the column of A by (i*n) mod p and the row of B by j mod p, convolve,
fold the result modulo x^p.  The convolution runs either directly (exact,
default for small primes) or through an FFT whose rounding is guarded by a
dead zone: any bit decision too close to call is redone from an exact rebuild
of that prime's counters.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .linalg import DenseMatrix

FFT_PRIME_THRESHOLD = 64  # primes below this use the direct convolution
DEAD_ZONE = 1e-6          # relative guard on FFT-based sign comparisons
VERIFY_RELATIVE = 1e-9    # weight threshold for float inputs, times stream weight


def _is_prime(m: int) -> bool:
    if m < 2:
        return False
    if m % 2 == 0:
        return m == 2
    d = 3
    while d * d <= m:
        if m % d == 0:
            return False
        d += 2
    return True


def _next_prime(m: int) -> int:
    m += 1
    while not _is_prime(m):
        m += 1
    return m


def _ceil_log(base: int, value: int) -> int:
    """Smallest t with base**t >= value, computed in exact integers."""
    t = 0
    v = 1
    while v < value:
        v *= base
        t += 1
    return t


@dataclass(frozen=True)
class PrimeSchedule:
    """Consecutive primes above the budget, enough for pairwise isolation."""

    b: int
    n: int
    padded_n: int
    ell: int
    primes: tuple

    @property
    def x(self) -> int:
        return len(self.primes)

    @property
    def bits(self) -> int:
        return 2 * self.ell


def build_prime_schedule(n: int, b: int) -> PrimeSchedule:
    """The x = (b-1)*ceil(log_b N) + 1 consecutive primes above b, N = n^2.

    n is padded up to a power of two first, so N covers every index the
    encoding can produce.  Any b distinct indices below N then collide in at
    most ceil(log_b N) residue classes per pair, leaving each one alone in at
    least one class.
    """
    if b < 2:
        raise ValueError("budget must be at least 2")
    if n < 2:
        raise ValueError("dimension must be at least 2")
    ell = (n - 1).bit_length()
    padded = 1 << ell
    big_n = padded * padded
    x = (b - 1) * _ceil_log(b, big_n) + 1
    primes = []
    p = b
    for _ in range(x):
        p = _next_prime(p)
        primes.append(p)
    return PrimeSchedule(b=b, n=n, padded_n=padded, ell=ell, primes=tuple(primes))


@dataclass
class GroupTables:
    """Residue-class counters: q is total group weight, g the per-bit split.

    Rectangular storage (x primes by largest prime); row j uses only its
    first primes[j] residues.  ``methods[j]`` records how row j was built so
    the candidate scan knows whether its comparisons are exact.
    """

    sched: PrimeSchedule
    q: np.ndarray          # (x, p_max)
    g: np.ndarray          # (x, p_max, 2*ell)
    methods: list
    stream_weight: float   # sum over outer products of ||a||_1 * ||b||_1

    def copy(self) -> "GroupTables":
        return GroupTables(
            sched=self.sched,
            q=self.q.copy(),
            g=self.g.copy(),
            methods=list(self.methods),
            stream_weight=self.stream_weight,
        )

    def subtract_entry(self, i: int, j: int, weight: float) -> None:
        """Remove a known entry's contribution from every group it touches."""
        sched = self.sched
        idx = i * sched.padded_n + j
        for t, p in enumerate(sched.primes):
            m = idx % p
            self.q[t, m] -= weight
            for k in range(sched.bits):
                if (idx >> k) & 1:
                    self.g[t, m, k] -= weight

    def write_csv(self, fh) -> None:
        """Dump as ``prime,residue,bit,counter`` rows; bit -1 is the group total."""
        fh.write("prime,residue,bit,counter\n")
        for t, p in enumerate(self.sched.primes):
            for m in range(p):
                fh.write(f"{p},{m},-1,{self.q[t, m]!r}\n")
                for k in range(self.sched.bits):
                    fh.write(f"{p},{m},{k},{self.g[t, m, k]!r}\n")


@dataclass(frozen=True)
class CandidateEntry:
    """A verified nonzero entry with the group that produced it."""

    i: int
    j: int
    weight: float
    prime: int
    residue: int


def majority_stream(updates, m: int):
    """Find the item whose |total weight| beats all other items' combined.

    First pass keeps one counter per bit of the item id plus the global
    total; the bit pattern of any majority item can be read off those.  The
    verification pass recomputes per-item totals exactly, so the returned
    item is a true majority or the result is None.  (That pass stores the
    live items, which is fine at the domain sizes this is used for; the
    bounded-space part is the candidate construction.)
    """
    if m < 1:
        raise ValueError("domain size must be positive")
    nbits = (m - 1).bit_length()

    total = 0.0
    bit_weight = [0.0] * nbits
    for item, v in updates:
        if not (0 <= item < m):
            raise ValueError(f"item {item} outside domain [{m}]")
        total += v
        for k in range(nbits):
            if (item >> k) & 1:
                bit_weight[k] += v

    candidate = 0
    for k in range(nbits):
        c1 = bit_weight[k]
        c0 = total - c1
        if (c1 > 0 and c0 < 0) or (c1 < 0 and c0 > 0):
            if total != 0.0:
                if (c1 > 0) == (total > 0):
                    candidate |= 1 << k
                continue
        if abs(c1) > abs(c0):
            candidate |= 1 << k

    if candidate >= m:
        return None

    totals = {}
    for item, v in updates:
        totals[item] = totals.get(item, 0.0) + v
    f_cand = totals.get(candidate, 0.0)
    rest = math.fsum(abs(w) for item, w in totals.items() if item != candidate)
    if abs(f_cand) > rest:
        return candidate, f_cand
    return None


def _mask_bit_positions(n: int, bit: int) -> np.ndarray:
    """Indicator of positions in [n] whose given bit is one."""
    return ((np.arange(n) >> bit) & 1).astype(np.float64)


def _fold(full: np.ndarray, p: int) -> np.ndarray:
    """Reduce convolution coefficients modulo x^p."""
    out = full[:p].copy()
    if full.size > p:
        out[: full.size - p] += full[p:]
    return out


def residue_histogram(a, bvec, p: int, mask: int | None = None,
                      method: str = "auto") -> np.ndarray:
    """Group weights of one outer product modulo p.

    out[m] = sum of a_i * b_j over entries with (i*n + j) mod p == m, where
    n = len(a).  With ``mask`` set, only entries whose mask-th index bit is
    one contribute; low bits live in j so they mask bvec, high bits live in i
    and mask a (requires n to be a power of two).
    """
    a = np.asarray(a, dtype=np.float64)
    bvec = np.asarray(bvec, dtype=np.float64)
    n = a.size
    if bvec.size != n:
        raise ValueError("vectors must have equal length")
    if p < 2:
        raise ValueError("modulus must be a prime > 1")
    if method not in ("auto", "naive", "fft"):
        raise ValueError(f"unknown method {method!r}")
    if mask is not None:
        if n & (n - 1):
            raise ValueError("bit masking requires a power-of-two dimension")
        ell = n.bit_length() - 1
        if not (0 <= mask < 2 * ell):
            raise ValueError(f"mask bit {mask} outside [0, {2 * ell})")
        if mask < ell:
            bvec = bvec * _mask_bit_positions(n, mask)
        else:
            a = a * _mask_bit_positions(n, mask - ell)

    idx = np.arange(n, dtype=np.int64)
    pa = np.bincount((idx * n) % p, weights=a, minlength=p)
    pb = np.bincount(idx % p, weights=bvec, minlength=p)

    if method == "auto":
        method = "naive" if p < FFT_PRIME_THRESHOLD else "fft"
    if method == "naive":
        full = np.convolve(pa, pb)
    else:
        nfft = 1 << (2 * p - 2).bit_length()
        full = np.fft.irfft(np.fft.rfft(pa, nfft) * np.fft.rfft(pb, nfft), nfft)[: 2 * p - 1]
    return _fold(full, p)


def _scatter_factors(a: DenseMatrix, b: DenseMatrix, padded: int):
    """Stack the outer-product factors with rows/columns padded to 2^ell.

    Returns (cols, rows): cols[i, t] = A[i, t] over padded i, rows[t, j]
    likewise for B.
    """
    n = a.n
    cols = np.zeros((padded, n))
    cols[:n, :] = a.values
    rows = np.zeros((n, padded))
    rows[:, :n] = b.values
    return cols, rows


def _prime_rows(cols, rows, masked_cols, masked_rows, p: int, ell: int, method: str):
    """Q and G rows for one prime, all outer products accumulated.

    The per-residue scatter is a one-hot matmul; summing pairwise polynomial
    products over outer products commutes with the convolution, so the naive
    path is one (p x p) cross product folded mod p and the FFT path one
    batched transform per masked variant.
    """
    padded = cols.shape[0]
    idx = np.arange(padded, dtype=np.int64)
    sa = np.zeros((padded, p))
    sa[idx, (idx * padded) % p] = 1.0
    sb = np.zeros((padded, p))
    sb[idx, idx % p] = 1.0

    ma = cols.T @ sa            # (steps, p)
    mb = rows @ sb              # (steps, p)
    ma_bits = [mc.T @ sa for mc in masked_cols]
    mb_bits = [mr @ sb for mr in masked_rows]

    bits = 2 * ell
    qrow = np.zeros(p)
    grow = np.zeros((p, bits))

    if method == "naive":
        fold_idx = (np.arange(p)[:, None] + np.arange(p)[None, :]) % p

        def conv_sum(fa, fb):
            cross = fa.T @ fb
            return np.bincount(fold_idx.ravel(), weights=cross.ravel(), minlength=p)
    else:
        nfft = 1 << (2 * p - 2).bit_length()

        def conv_sum(fa, fb):
            spectrum = np.einsum("tf,tf->f", np.fft.rfft(fa, nfft, axis=1),
                                 np.fft.rfft(fb, nfft, axis=1))
            return _fold(np.fft.irfft(spectrum, nfft)[: 2 * p - 1], p)

    qrow[:] = conv_sum(ma, mb)
    for k in range(bits):
        if k < ell:
            grow[:, k] = conv_sum(ma, mb_bits[k])
        else:
            grow[:, k] = conv_sum(ma_bits[k - ell], mb)
    return qrow, grow


def compute_groups(a: DenseMatrix, b: DenseMatrix, sched: PrimeSchedule,
                   method: str = "auto", parallel: bool = False) -> GroupTables:
    """Fill the per-prime residue counters in one pass over the factors."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    if a.n != sched.n:
        raise ValueError(f"schedule built for n={sched.n}, matrices have n={a.n}")
    if method not in ("auto", "naive", "fft"):
        raise ValueError(f"unknown method {method!r}")

    ell = sched.ell
    cols, rows = _scatter_factors(a, b, sched.padded_n)
    masked_cols = [cols * _mask_bit_positions(sched.padded_n, k)[:, None] for k in range(ell)]
    masked_rows = [rows * _mask_bit_positions(sched.padded_n, k)[None, :] for k in range(ell)]

    p_max = sched.primes[-1]
    q = np.zeros((sched.x, p_max))
    g = np.zeros((sched.x, p_max, sched.bits))
    methods = []
    for p in sched.primes:
        methods.append(method if method != "auto" else
                       ("naive" if p < FFT_PRIME_THRESHOLD else "fft"))

    def work(t):
        p = sched.primes[t]
        qrow, grow = _prime_rows(cols, rows, masked_cols, masked_rows, p, ell, methods[t])
        q[t, :p] = qrow
        g[t, :p, :] = grow

    if parallel:
        with ThreadPoolExecutor() as pool:
            list(pool.map(work, range(sched.x)))
    else:
        for t in range(sched.x):
            work(t)

    stream_weight = float(np.abs(a.values).sum(axis=0) @ np.abs(b.values).sum(axis=1))
    return GroupTables(sched=sched, q=q, g=g, methods=methods, stream_weight=stream_weight)


def _decide_bits(w: float, gvec, nbits: int, exact: bool):
    """Reconstruct the majority candidate's bits from one group's counters.

    Opposite-sign subgroup totals: the majority shares the sign of the group
    total.  Same signs: it sits in the subgroup with larger absolute weight.
    On inexact counters any comparison inside the dead zone returns None so
    the caller can rebuild the group exactly.
    """
    bits = 0
    for k in range(nbits):
        c1 = float(gvec[k])
        c0 = w - c1
        tau = 0.0 if exact else DEAD_ZONE * max(1.0, abs(w), abs(c1), abs(c0))
        s1 = 0 if abs(c1) <= tau else (1 if c1 > 0 else -1)
        s0 = 0 if abs(c0) <= tau else (1 if c0 > 0 else -1)
        if s1 and s0 and s1 != s0:
            sw = 0 if abs(w) <= tau else (1 if w > 0 else -1)
            if sw == 0:
                if not exact:
                    return None
                # exact w == 0 cannot carry a majority; fall through to magnitudes
            elif s1 == sw:
                bits |= 1 << k
                continue
            else:
                continue
        diff = abs(c1) - abs(c0)
        if not exact and abs(diff) <= tau:
            return None
        if diff > 0:
            bits |= 1 << k
    return bits


def _values_integral(a: DenseMatrix, b: DenseMatrix) -> bool:
    return bool(np.all(a.values == np.rint(a.values)) and np.all(b.values == np.rint(b.values)))


def check_candidates(tables: GroupTables, sched: PrimeSchedule,
                     a: DenseMatrix, b: DenseMatrix,
                     subtracted=(), exclude=frozenset()):
    """Reconstruct one candidate per group and keep the verified nonzeros.

    Candidates are verified by an exact inner product (the second pass).
    Integer-valued inputs keep any nonzero weight; float inputs apply a small
    threshold relative to the total stream weight.  ``subtracted`` lists
    (i, j, weight) adjustments to re-apply whenever a prime's counters are
    rebuilt exactly; ``exclude`` positions are never reported again.
    """
    ell = sched.ell
    nbits = sched.bits
    padded = sched.padded_n
    n = sched.n
    integral = _values_integral(a, b) and all(
        float(w) == int(w) for _, _, w in subtracted
    )
    threshold = 0.0 if integral else VERIFY_RELATIVE * tables.stream_weight

    exact_rows = {}
    scatter_cache = []

    def get_exact(t):
        """Rebuild prime t's counters with the direct convolution."""
        if t not in exact_rows:
            p = sched.primes[t]
            if not scatter_cache:
                cols, rows = _scatter_factors(a, b, padded)
                scatter_cache.append((
                    cols, rows,
                    [cols * _mask_bit_positions(padded, k)[:, None] for k in range(ell)],
                    [rows * _mask_bit_positions(padded, k)[None, :] for k in range(ell)],
                ))
            cols, rows, masked_cols, masked_rows = scatter_cache[0]
            qrow, grow = _prime_rows(cols, rows, masked_cols, masked_rows, p, ell, "naive")
            for i, j, w in subtracted:
                idx = i * padded + j
                m = idx % p
                qrow[m] -= w
                for k in range(nbits):
                    if (idx >> k) & 1:
                        grow[m, k] -= w
            exact_rows[t] = (qrow, grow)
        return exact_rows[t]

    found = {}
    for t, p in enumerate(sched.primes):
        exact = tables.methods[t] == "naive"
        qrow = tables.q[t]
        grow = tables.g[t]
        for m in range(p):
            w = float(qrow[m])
            gvec = grow[m]
            if w == 0.0 and not gvec.any():
                continue  # empty group; a majority forces a nonzero total
            if exact and w == 0.0:
                continue
            bits = _decide_bits(w, gvec, nbits, exact)
            if bits is None:
                eq, eg = get_exact(t)
                w = float(eq[m])
                gvec = eg[m]
                if w == 0.0:
                    continue
                bits = _decide_bits(w, gvec, nbits, True)
            idx = bits
            if idx % p != m:
                continue  # no majority can produce an inconsistent residue
            i, j = idx >> ell, idx & (padded - 1)
            if i >= n or j >= n:
                continue
            if (i, j) in found or (i, j) in exclude:
                continue
            weight = float(a.values[i, :] @ b.values[:, j])
            if (weight != 0.0) if integral else (abs(weight) > threshold):
                found[(i, j)] = CandidateEntry(i=i, j=j, weight=weight, prime=p, residue=m)

    return sorted(found.values(), key=lambda e: (-abs(e.weight), e.i * n + e.j))


def recover_heavy(a: DenseMatrix, b: DenseMatrix, budget: int,
                  method: str = "auto", parallel: bool = False):
    """All verified nonzero entries the group tables can isolate.

    When the budget's premise holds (each of the budget heaviest entries
    outweighs the combined absolute weight of everything below them), the
    result contains those entries with exact weights.
    """
    sched = build_prime_schedule(a.n, budget)
    tables = compute_groups(a, b, sched, method=method, parallel=parallel)
    return check_candidates(tables, sched, a, b)


def multi_pass_topk(a: DenseMatrix, b: DenseMatrix, k: int, s: int, z: float,
                    budget_constant: float = 1.0, method: str = "auto",
                    parallel: bool = False):
    """The k*s heaviest entries of a Zipf(z)-skewed product over s rounds.

    The isolation budget is ceil(c * k^(z/(z-1))) per the tail bound; c is
    the tunable ``budget_constant``.  Counters are built once; each round
    subtracts everything already found, reconstructs candidates, and keeps
    the k heaviest new entries with exactly verified weights.
    """
    if s < 1:
        raise ValueError("pass count must be at least 1")
    if k < 1:
        raise ValueError("per-pass count must be at least 1")
    if z <= 1:
        raise ValueError("the skew analysis needs z > 1")
    x_budget = max(2, math.ceil(budget_constant * k ** (z / (z - 1.0))))
    sched = build_prime_schedule(a.n, x_budget)
    pristine = compute_groups(a, b, sched, method=method, parallel=parallel)

    found = {}
    for _ in range(s):
        tables = pristine.copy()
        subtracted = [(e.i, e.j, e.weight) for e in found.values()]
        for i, j, w in subtracted:
            tables.subtract_entry(i, j, w)
        candidates = check_candidates(
            tables, sched, a, b,
            subtracted=subtracted, exclude=frozenset(found),
        )
        new = candidates[:k]
        if not new:
            break
        for e in new:
            found[(e.i, e.j)] = e
    n = a.n
    return sorted(found.values(), key=lambda e: (-abs(e.weight), e.i * n + e.j))
