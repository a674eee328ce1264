"""Angular coupling coefficients of the collision operator.

Everything angular reduces to Gaunt integrals of three spherical harmonics
over the unit sphere.  After the azimuthal integral enforces m1+m2+m3 = 0 the
integrand is a polynomial of degree l1+l2+l3 in cos(theta), so Gauss-Legendre
quadrature of order (l1+l2+l3)/2 + 1 evaluates the integral exactly (to
roundoff).  This avoids translating between the package's phase-free
harmonics and the Condon-Shortley convention baked into Wigner-3j closed
forms; a 3j cross-check lives in the test suite behind an explicit sign
translation layer.

Five coefficient families drive the bilinear operator:

    A-  : shell-1 driver, source (n+1, l-1) ladder
    A+  : shell-1 driver, source (n, l+1) ladder
    A1/A2/A3 : shell-2 angular driver, sources two shells below the target
    drift    : radial shell-2 driver (pure (n, l) -> (n+1, l) shift)

plus the diagonal channel attached to the Maxwellian driver mode (0,0,0).
All coefficients are real; complex arithmetic enters only through state
amplitudes.
"""

import hashlib
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .basis import Mode, mode_table
from .errors import CapacityError, TensorCacheError
from .specfun import gauss_legendre, normalized_plm

MAX_SHELL = 64

CHANNELS = ("diag", "Am", "Ap", "drift", "A1", "A2", "A3")

_SQRT_PI_3 = math.sqrt(math.pi / 3.0)
_SQRT_PI_15 = math.sqrt(math.pi / 15.0)


def _selection_ok(l1, m1, l2, m2, l3, m3) -> bool:
    if abs(m1) > l1 or abs(m2) > l2 or abs(m3) > l3:
        return False
    if m1 + m2 + m3 != 0:
        return False
    if (l1 + l2 + l3) % 2 != 0:
        return False
    if l3 < abs(l1 - l2) or l3 > l1 + l2:
        return False
    return True


@lru_cache(maxsize=200_000)
def _gaunt_theta(l1, m1, l2, m2, l3, m3) -> float:
    rule = gauss_legendre((l1 + l2 + l3) // 2 + 1)
    vals = (
        normalized_plm(l1, m1, rule.nodes)
        * normalized_plm(l2, m2, rule.nodes)
        * normalized_plm(l3, m3, rule.nodes)
    )
    return 2.0 * math.pi * float(np.dot(rule.weights, vals))


def gaunt(l1: int, m1: int, l2: int, m2: int, l3: int, m3: int) -> float:
    """Integral of Y_{l1}^{m1} Y_{l2}^{m2} Y_{l3}^{m3} over the sphere.

    Returns an analytic zero whenever a selection rule fails
    (m-sum nonzero, odd l-sum, or triangle violation).
    """
    for l, m in ((l1, m1), (l2, m2), (l3, m3)):
        if l < 0:
            return 0.0
        if abs(m) > l:
            raise ValueError(f"gaunt index |m|={abs(m)} exceeds l={l}")
    if not _selection_ok(l1, m1, l2, m2, l3, m3):
        return 0.0
    # symmetric under pair permutations: canonicalize for the cache
    (a, p), (b, q), (c, r) = sorted(((l1, m1), (l2, m2), (l3, m3)))
    return _gaunt_theta(a, abs(p), b, abs(q), c, abs(r))


def coef_tilde_C(m1: int, m: int, l: int, lp: int) -> float:
    """Expansion coefficient of Y_1^{m1} Y_l^m onto Y_{lp}^{m1+m}.

    Zero by convention when lp < 0 (the degree -1 harmonic is identically
    zero) or the target order is out of range.
    """
    if lp not in (l - 1, l + 1):
        raise ValueError(f"lp must be l-1 or l+1, got l={l}, lp={lp}")
    if lp < 0 or abs(m1 + m) > lp:
        return 0.0
    return gaunt(1, m1, l, m, lp, -m1 - m)


def A_minus(n: int, l: int, m: int, m1: int) -> float:
    """Coefficient of phi_{n+1,l-1,m+m1} in the shell-1 driver expansion."""
    if l < 1:
        return 0.0
    return 4.0 * _SQRT_PI_3 * (l - 1) * math.sqrt(2.0 * (n + 1)) * coef_tilde_C(m1, m, l, l - 1)


def A_plus(n: int, l: int, m: int, m1: int) -> float:
    """Coefficient of phi_{n,l+1,m+m1} in the shell-1 driver expansion."""
    return 4.0 * _SQRT_PI_3 * (l + 2) * math.sqrt(2.0 * n + 2.0 * l + 3.0) * coef_tilde_C(m1, m, l, l + 1)


def A1(n: int, l: int, m: int, m2: int) -> float:
    """Coefficient of phi_{n+2,l-2,m+m2} in the shell-2 driver expansion."""
    if l < 2 or abs(m + m2) > l - 2:
        return 0.0
    g = gaunt(2, m2, l, m, l - 2, -m2 - m)
    return -4.0 * _SQRT_PI_15 * math.sqrt(4.0 * (n + 2) * (n + 1)) * g


def A2(n: int, l: int, m: int, m2: int) -> float:
    """Coefficient of phi_{n+1,l,m+m2} in the shell-2 driver expansion."""
    if abs(m + m2) > l:
        return 0.0
    g = gaunt(2, m2, l, m, l, -m2 - m)
    return 4.0 * _SQRT_PI_15 * math.sqrt(2.0 * (n + 1) * (2.0 * n + 2.0 * l + 3.0)) * g


def A3(n: int, l: int, m: int, m2: int) -> float:
    """Coefficient of phi_{n,l+2,m+m2} in the shell-2 driver expansion."""
    if abs(m + m2) > l + 2:
        return 0.0
    g = gaunt(2, m2, l, m, l + 2, -m2 - m)
    return -4.0 * _SQRT_PI_15 * math.sqrt((2.0 * n + 2.0 * l + 5.0) * (2.0 * n + 2.0 * l + 3.0)) * g


def drift_coef(n: int, l: int) -> float:
    """Radial-driver coefficient feeding mode (n, l) from (n-1, l)."""
    return 4.0 * math.sqrt(3.0 * n * (2.0 * n + 2.0 * l + 1.0)) / 3.0


def diag_coef(n: int, l: int) -> float:
    """Maxwellian-driver diagonal, -(2(2n+l) + l(l+1)) for every mode."""
    return -float(2 * (2 * n + l) + l * (l + 1))


def sum_sq_channel(channel: str, n: int, l: int, m_star: int) -> float:
    """Sum over (m, m2) with m + m2 = m_star of the squared coefficient.

    Indices follow the target-side form: channel A1 sums |A1(n-2, l+2, ., .)|^2,
    A2 sums |A2(n-1, l, ., .)|^2 and A3 sums |A3(n, l-2, ., .)|^2 for a target
    mode (n, l, m_star).
    """
    if abs(m_star) > l:
        raise ValueError(f"|m_star| <= l required, got l={l}, m_star={m_star}")
    total = 0.0
    for m2 in range(-2, 3):
        m = m_star - m2
        if channel == "A1":
            if n >= 2 and abs(m) <= l + 2:
                total += A1(n - 2, l + 2, m, m2) ** 2
        elif channel == "A2":
            if n >= 1 and abs(m) <= l:
                total += A2(n - 1, l, m, m2) ** 2
        elif channel == "A3":
            if l >= 2 and abs(m) <= l - 2:
                total += A3(n, l - 2, m, m2) ** 2
        else:
            raise ValueError(f"unknown channel {channel!r}")
    return total


def sum_sq_closed_form(channel: str, n: int, l: int) -> float:
    """Closed forms the channel sums collapse to via Legendre products.

    A1 and A3 are exact identities; the A2 expression is the same
    Legendre-product reduction (its status as an equality rather than an
    upper bound is confirmed numerically by the verification suite).
    """
    if channel == "A1":
        if n < 2:
            return 0.0
        return 8.0 * n * (n - 1) * (l + 2) * (l + 1) / ((2 * l + 3) * (2 * l + 1))
    if channel == "A2":
        if n < 1 or l < 1:
            return 0.0
        return 8.0 * n * (2 * n + 2 * l + 1) * l * (l + 1) / (3.0 * (2 * l + 3) * (2 * l - 1))
    if channel == "A3":
        if l < 2:
            return 0.0
        return 2.0 * (2 * n + 2 * l + 1) * (2 * n + 2 * l - 1) * l * (l - 1) / ((2 * l + 1) * (2 * l - 1))
    raise ValueError(f"unknown channel {channel!r}")


def sum_sq_bound(channel: str, n: int, l: int) -> float:
    """Rotation-invariant upper bounds on the channel sums."""
    if channel == "A1":
        return 16.0 * n * (n - 1) / 3.0
    if channel == "A2":
        return 4.0 * n * (2 * n + 2 * l + 1) / 3.0
    if channel == "A3":
        return (2.0 * n + 2 * l + 1) * (2 * n + 2 * l - 1) / 2.0
    raise ValueError(f"unknown channel {channel!r}")


@dataclass(frozen=True)
class CouplingTensor:
    """Precomputed coupling stencil for all targets with shell <= N.

    ``channels`` maps each channel name to (tgt, src, drv, mdrv, coef)
    arrays of flat mode indices (into ``mode_table(N)``), the driver's
    azimuthal index, and the real coefficient.  ``tgt/src/drv/coef`` are the
    concatenation used by the apply kernel.
    """

    N: int
    channels: dict
    tgt: np.ndarray = field(repr=False)
    src: np.ndarray = field(repr=False)
    drv: np.ndarray = field(repr=False)
    coef: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.coef)

    def cascade_by_target(self) -> dict:
        """Shell-2 driver entries grouped by target flat index.

        Maps tgt -> list of (src, m2, coef) over the A1/A2/A3 channels; this
        is the stencil of the reduced shell-cascade system.
        """
        grouped: dict = {}
        for name in ("A1", "A2", "A3"):
            tgt, src, _drv, mdrv, coef = self.channels[name]
            for i in range(len(coef)):
                grouped.setdefault(int(tgt[i]), []).append(
                    (int(src[i]), int(mdrv[i]), float(coef[i]))
                )
        return grouped


def _tensor_rows(N: int):
    """Enumerate (channel, target, source, driver, mdrv, coef) entries."""
    table = mode_table(N)
    rows = {name: [] for name in CHANNELS}
    idx = table.index
    for ti, (n, l, m) in enumerate(table.modes):
        c = diag_coef(n, l)
        if c != 0.0:
            rows["diag"].append((ti, ti, idx[Mode(0, 0, 0)], 0, c))
        for m1 in (-1, 0, 1):
            ms = m - m1
            if n >= 1 and abs(ms) <= l + 1:
                c = A_minus(n - 1, l + 1, ms, m1)
                if c != 0.0:
                    rows["Am"].append(
                        (ti, idx[Mode(n - 1, l + 1, ms)], idx[Mode(0, 1, m1)], m1, c)
                    )
            if l >= 1 and abs(ms) <= l - 1:
                c = A_plus(n, l - 1, ms, m1)
                if c != 0.0:
                    rows["Ap"].append(
                        (ti, idx[Mode(n, l - 1, ms)], idx[Mode(0, 1, m1)], m1, c)
                    )
        if n >= 1:
            c = drift_coef(n, l)
            if c != 0.0:
                rows["drift"].append(
                    (ti, idx[Mode(n - 1, l, m)], idx[Mode(1, 0, 0)], 0, c)
                )
        for m2 in range(-2, 3):
            ms = m - m2
            if n >= 2 and abs(ms) <= l + 2:
                c = A1(n - 2, l + 2, ms, m2)
                if c != 0.0:
                    rows["A1"].append(
                        (ti, idx[Mode(n - 2, l + 2, ms)], idx[Mode(0, 2, m2)], m2, c)
                    )
            if n >= 1 and abs(ms) <= l:
                c = A2(n - 1, l, ms, m2)
                if c != 0.0:
                    rows["A2"].append(
                        (ti, idx[Mode(n - 1, l, ms)], idx[Mode(0, 2, m2)], m2, c)
                    )
            if l >= 2 and abs(ms) <= l - 2:
                c = A3(n, l - 2, ms, m2)
                if c != 0.0:
                    rows["A3"].append(
                        (ti, idx[Mode(n, l - 2, ms)], idx[Mode(0, 2, m2)], m2, c)
                    )
    return rows


def _assemble(N: int, rows: dict) -> CouplingTensor:
    channels = {}
    cat = {"tgt": [], "src": [], "drv": [], "coef": []}
    for name in CHANNELS:
        entries = rows[name]
        tgt = np.array([e[0] for e in entries], dtype=np.int64)
        src = np.array([e[1] for e in entries], dtype=np.int64)
        drv = np.array([e[2] for e in entries], dtype=np.int64)
        mdrv = np.array([e[3] for e in entries], dtype=np.int64)
        coef = np.array([e[4] for e in entries], dtype=np.float64)
        for arr in (tgt, src, drv, mdrv, coef):
            arr.flags.writeable = False
        channels[name] = (tgt, src, drv, mdrv, coef)
        cat["tgt"].append(tgt)
        cat["src"].append(src)
        cat["drv"].append(drv)
        cat["coef"].append(coef)
    tgt = np.concatenate(cat["tgt"]) if cat["tgt"] else np.empty(0, np.int64)
    src = np.concatenate(cat["src"])
    drv = np.concatenate(cat["drv"])
    coef = np.concatenate(cat["coef"])
    for arr in (tgt, src, drv, coef):
        arr.flags.writeable = False
    return CouplingTensor(N=N, channels=channels, tgt=tgt, src=src, drv=drv, coef=coef)


@lru_cache(maxsize=8)
def build_tensor(N: int) -> CouplingTensor:
    """Materialize the full coupling stencil for truncation N.

    Covers every target with shell <= N; entries on targets at shell <= 2
    only fire when an input carries null-space amplitude, so the reduced
    solver never sees them, but the full bilinear operator needs them.
    """
    if N < 2:
        raise ValueError(f"truncation must be >= 2, got {N}")
    if N > MAX_SHELL:
        raise CapacityError(f"truncation {N} exceeds maximum shell {MAX_SHELL}")
    return _assemble(N, _tensor_rows(N))


def save_tensor(tensor: CouplingTensor, path) -> None:
    """Write the tensor cache file.

    Format: header ``landau-coupling v1 N=<N>``, one
    ``channel,tn,tl,tm,sn,sl,sm,m2,coef`` row per entry (17 significant
    digits), and a trailing ``checksum=<sha256>`` line over everything above.
    """
    table = mode_table(tensor.N)
    lines = [f"landau-coupling v1 N={tensor.N}"]
    for name in CHANNELS:
        tgt, src, _drv, mdrv, coef = tensor.channels[name]
        for i in range(len(coef)):
            t = table.modes[int(tgt[i])]
            s = table.modes[int(src[i])]
            lines.append(
                f"{name},{t.n},{t.l},{t.m},{s.n},{s.l},{s.m},"
                f"{int(mdrv[i])},{format(float(coef[i]), '.17g')}"
            )
    body = "\n".join(lines) + "\n"
    digest = hashlib.sha256(body.encode()).hexdigest()
    with open(path, "w") as fh:
        fh.write(body)
        fh.write(f"checksum={digest}\n")


_DRIVER_MODE = {
    "diag": lambda m: Mode(0, 0, 0),
    "drift": lambda m: Mode(1, 0, 0),
    "Am": lambda m: Mode(0, 1, m),
    "Ap": lambda m: Mode(0, 1, m),
    "A1": lambda m: Mode(0, 2, m),
    "A2": lambda m: Mode(0, 2, m),
    "A3": lambda m: Mode(0, 2, m),
}


def load_tensor(path, expected_N: int | None = None) -> CouplingTensor:
    """Read a tensor cache file, validating checksum and truncation."""
    with open(path) as fh:
        raw = fh.read()
    lines = raw.splitlines()
    if len(lines) < 2 or not lines[0].startswith("landau-coupling v1 N="):
        raise TensorCacheError(f"{path}: bad header")
    if not lines[-1].startswith("checksum="):
        raise TensorCacheError(f"{path}: missing checksum line")
    body = "\n".join(lines[:-1]) + "\n"
    digest = hashlib.sha256(body.encode()).hexdigest()
    if lines[-1] != f"checksum={digest}":
        raise TensorCacheError(f"{path}: checksum mismatch")
    N = int(lines[0].split("N=")[1])
    if expected_N is not None and N != expected_N:
        raise TensorCacheError(f"{path}: cache holds N={N}, expected N={expected_N}")
    table = mode_table(N)
    idx = table.index
    rows = {name: [] for name in CHANNELS}
    for lineno, line in enumerate(lines[1:-1], start=2):
        parts = line.split(",")
        if len(parts) != 9 or parts[0] not in CHANNELS:
            raise TensorCacheError(f"{path}:{lineno}: bad row {line!r}")
        name = parts[0]
        tn, tl, tm, sn, sl, sm, mdrv = map(int, parts[1:8])
        coef = float(parts[8])
        try:
            ti = idx[Mode(tn, tl, tm)]
            si = idx[Mode(sn, sl, sm)]
            di = idx[_DRIVER_MODE[name](mdrv)]
        except KeyError as exc:
            raise TensorCacheError(f"{path}:{lineno}: mode outside table") from exc
        rows[name].append((ti, si, di, mdrv, coef))
    return _assemble(N, rows)
