"""Independent reference values for the unit tests (numpy/scipy only).

Writes tests/oracle_values.hpp. Modes: (site, up) -> bit site, (site, down) -> bit L + site.
"""
import itertools
import pathlib

import numpy as np
from scipy.linalg import expm, eigh


def annihilators(n):
    dim = 1 << n
    ops = []
    for p in range(n):
        c = np.zeros((dim, dim))
        for s in range(dim):
            if s >> p & 1:
                sign = (-1) ** bin(s & ((1 << p) - 1)).count("1")
                c[s ^ (1 << p), s] = sign
        ops.append(c)
    return ops


def hubbard(L, J, U):
    n = 2 * L
    c = annihilators(n)
    cd = [x.T for x in c]
    H = np.zeros((1 << n, 1 << n))
    for spin in (0, 1):
        for i in range(L - 1):
            a, b = i + spin * L, i + 1 + spin * L
            H -= J * (cd[a] @ c[b] + cd[b] @ c[a])
    for i in range(L):
        H += U * (cd[i] @ c[i]) @ (cd[i + L] @ c[i + L])
    sx = [cd[i] @ c[i + L] + cd[i + L] @ c[i] for i in range(L)]
    return H, c, cd, sx


def sector(L, Ne):
    eta = Ne // 2
    keep = [s for s in range(1 << 2 * L)
            if bin(s & ((1 << L) - 1)).count("1") == eta and bin(s >> L).count("1") == eta]
    return np.array(keep)


def slater(L, Ne, J):
    h = np.zeros((L, L))
    for i in range(L - 1):
        h[i, i + 1] = h[i + 1, i] = -J
    _, vecs = eigh(h)
    occ = vecs[:, : Ne // 2]
    n = 2 * L
    c = annihilators(n)
    vac = np.zeros(1 << n)
    vac[0] = 1.0
    psi = vac
    for spin in (0, 1):
        for o in range(Ne // 2):
            op = sum(occ[i, o] * c[i + spin * L].T for i in range(L))
            psi = op @ psi
    return psi / np.linalg.norm(psi)


def ground(L, U, Ne, J=1.0):
    H, *_ = hubbard(L, J, U)
    idx = sector(L, Ne)
    w, v = eigh(H[np.ix_(idx, idx)])
    psi = np.zeros(1 << 2 * L)
    psi[idx] = v[:, 0]
    return w[0], w[1] - w[0], psi


def retarded_gf(L, U, psi, j, k, t, J=1.0):
    # A(t) = e^{-iHt} A e^{iHt}, G = -i <[S_k(t), S_j]>
    H, _, _, sx = hubbard(L, J, U)
    Ut = expm(-1j * H * t)
    skt = Ut @ sx[k] @ Ut.conj().T
    comm = skt @ sx[j] - sx[j] @ skt
    return -1j * (psi.conj() @ comm @ psi)


def quench_series(L, U, Ne, T, n_samples, J=1.0):
    H, _, _, sx = hubbard(L, J, U)
    psi = slater(L, Ne, J)
    q = expm(1j * np.pi / 4 * sx[L // 2]) @ psi
    out = np.zeros((L, n_samples))
    for m in range(n_samples):
        t = T * m / n_samples
        s = expm(-1j * H * t) @ q
        for i in range(L):
            out[i, m] = (s.conj() @ sx[i] @ s).real
    return out


def trotter_value(L, U, Ne, t, steps, J=1.0):
    _, c, cd, sx = hubbard(L, J, U)
    dt = t / steps
    def bonds(parity):
        H = np.zeros_like(sx[0])
        for spin in (0, 1):
            for i in range(parity, L - 1, 2):
                a, b = i + spin * L, i + 1 + spin * L
                H -= J * (cd[a] @ c[b] + cd[b] @ c[a])
        return H
    onsite = sum((cd[i] @ c[i]) @ (cd[i + L] @ c[i + L]) for i in range(L)) * U
    step = expm(-1j * onsite * dt) @ expm(-1j * bonds(1) * dt) @ expm(-1j * bonds(0) * dt)
    s = expm(1j * np.pi / 4 * sx[L // 2]) @ slater(L, Ne, J)
    for _ in range(steps):
        s = step @ s
    return [(s.conj() @ sx[i] @ s).real for i in range(L)]


def qsf(values, T, omega_max=6.0):
    L, N = values.shape
    dt = T / N
    Np = int(np.ceil(2 * np.pi * N * N / (omega_max * N * dt) - 1e-9))
    P = 2 * Np
    dw = np.pi / (Np * dt)
    nmax = int(np.floor(omega_max / dw + 1e-9))
    sig = np.zeros((L, P))
    sig[:, :N] = values
    for m in range(1, Np):
        sig[:, P - m] = sig[:, m]
    spec = np.fft.fft(sig, axis=1)
    cols = [spec[:, n % P] for n in range(-nmax, nmax + 1)]
    temporal = np.stack(cols, axis=1)
    ks = 2 * np.pi * np.arange(L) / L - np.pi
    phase = np.exp(-1j * np.outer(ks, np.arange(L)))
    mag = np.abs(phase @ temporal)
    return mag / mag.max(), nmax


def fmt_array(name, arr):
    flat = ", ".join(repr(float(x)) for x in np.ravel(arr))
    return f"inline constexpr double {name}[] = {{{flat}}};\n"


def main():
    lines = ["// Generated by tests/oracles/gen_oracles.py; do not edit.\n", "#pragma once\n\n",
             "namespace oracle {\n\n"]
    e4, gap4, _ = ground(4, 3.0, 4)
    e3, gap3, psi3 = ground(3, 2.0, 2)
    lines.append(f"inline constexpr double kGroundL4U3Ne4 = {float(e4)!r};\n")
    lines.append(f"inline constexpr double kGapL4U3Ne4 = {float(gap4)!r};\n")
    lines.append(f"inline constexpr double kGroundL3U2Ne2 = {float(e3)!r};\n")
    gf = [retarded_gf(3, 2.0, psi3, 1, k, t) for k in range(3) for t in (0.5, 1.3)]
    lines.append(fmt_array("kGfL3U2Re", [g.real for g in gf]))
    lines.append(fmt_array("kGfL3U2Im", [g.imag for g in gf]))
    series = quench_series(3, 2.0, 2, 2.0, 4)
    lines.append(fmt_array("kQuenchSeriesL3U2", series))
    lines.append(fmt_array("kTrotterL3U2T1N2", trotter_value(3, 2.0, 2, 1.0, 2)))
    lines.append(fmt_array("kTrotterL4U3T1N3", trotter_value(4, 3.0, 4, 1.0, 3)))
    x = np.arange(5)[:, None]
    t = (np.arange(30) * 0.1)[None, :]
    sig = np.sin(0.7 * x + 1.3 * t) + 0.1 * x * t
    mag, nmax = qsf(sig, 3.0)
    lines.append(f"inline constexpr int kQsfNmax = {nmax};\n")
    picks = [(m, n) for m in range(5) for n in (0, nmax // 2, nmax, nmax + 7, 2 * nmax)]
    lines.append("inline constexpr int kQsfPickRow[] = {" + ", ".join(str(m) for m, _ in picks) + "};\n")
    lines.append("inline constexpr int kQsfPickCol[] = {" + ", ".join(str(n) for _, n in picks) + "};\n")
    lines.append(fmt_array("kQsfPickValue", [mag[m, n] for m, n in picks]))
    lines.append("\n}  // namespace oracle\n")
    out = pathlib.Path(__file__).resolve().parents[1] / "oracle_values.hpp"
    out.write_text("".join(lines))
    print(out.read_text())


if __name__ == "__main__":
    main()
