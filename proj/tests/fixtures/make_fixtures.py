#!/usr/bin/env python3
"""Generate the bundled FCIDUMP fixtures and their frozen reference values.

Minimal-basis hydrogen systems, computed from scratch: STO-3G s-Gaussian
integrals in closed form, RHF by Roothaan iteration (Lowdin orthogonalization,
no SCF libraries), MO transformation, and a direct determinant-basis FCI used
to freeze reference energies. Everything is deterministic; rerunning must
reproduce the committed files byte for byte.
"""

import itertools
import json
import math
import os

import numpy as np

# STO-3G hydrogen 1s: exponents pre-scaled for zeta = 1.24.
H_EXPONENTS = np.array([3.42525091, 0.62391373, 0.16885540])
H_COEFFS = np.array([0.15432897, 0.53532814, 0.44463454])


def f0(t):
    if t < 1e-12:
        return 1.0
    return 0.5 * math.sqrt(math.pi / t) * math.erf(math.sqrt(t))


def norm_s(alpha):
    return (2.0 * alpha / math.pi) ** 0.75


def build_integrals(centers):
    """AO overlap, core Hamiltonian, and chemist-notation ERIs for 1s shells."""
    n = len(centers)
    prim = []  # (alpha, coeff * norm, center)
    shells = []
    for a in range(n):
        idx = []
        for alpha, c in zip(H_EXPONENTS, H_COEFFS):
            idx.append(len(prim))
            prim.append((alpha, c * norm_s(alpha), np.asarray(centers[a], dtype=float)))
        shells.append(idx)

    def pair(i, j):
        ai, ci, ra = prim[i]
        aj, cj, rb = prim[j]
        p = ai + aj
        diff = ra - rb
        r2 = float(diff @ diff)
        k = math.exp(-ai * aj / p * r2)
        center = (ai * ra + aj * rb) / p
        return p, k, center, ci * cj, r2, ai, aj

    s = np.zeros((n, n))
    t = np.zeros((n, n))
    v = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            for i in shells[a]:
                for j in shells[b]:
                    p, k, pc, cc, r2, ai, aj = pair(i, j)
                    base = (math.pi / p) ** 1.5 * k * cc
                    s[a, b] += base
                    mu = ai * aj / p
                    t[a, b] += mu * (3.0 - 2.0 * mu * r2) * base
                    for rc in centers:
                        dpc = pc - np.asarray(rc, dtype=float)
                        v[a, b] -= 2.0 * math.pi / p * k * cc * f0(p * float(dpc @ dpc))

    eri = np.zeros((n, n, n, n))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    total = 0.0
                    for i in shells[a]:
                        for j in shells[b]:
                            p, kp, pp, ccp, _, _, _ = pair(i, j)
                            for k2 in shells[c]:
                                for l in shells[d]:
                                    q, kq, pq, ccq, _, _, _ = pair(k2, l)
                                    dpq = pp - pq
                                    arg = p * q / (p + q) * float(dpq @ dpq)
                                    total += (
                                        2.0 * math.pi ** 2.5
                                        / (p * q * math.sqrt(p + q))
                                        * kp * kq * ccp * ccq * f0(arg)
                                    )
                    eri[a, b, c, d] = total
    return s, t + v, eri


def nuclear_repulsion(centers):
    e = 0.0
    for (i, ra), (j, rb) in itertools.combinations(enumerate(centers), 2):
        del i, j
        e += 1.0 / float(np.linalg.norm(np.asarray(ra) - np.asarray(rb)))
    return e


def rhf(s, hcore, eri, n_occ, iters=200, tol=1e-12):
    w, u = np.linalg.eigh(s)
    x = u @ np.diag(w ** -0.5) @ u.T
    p = np.zeros_like(s)
    energy = 0.0
    for _ in range(iters):
        g = np.einsum("ls,mnsl->mn", p, eri) - 0.5 * np.einsum("ls,mlsn->mn", p, eri)
        f = hcore + g
        fp = x.T @ f @ x
        eps, cp = np.linalg.eigh(fp)
        c = x @ cp
        p_new = 2.0 * c[:, :n_occ] @ c[:, :n_occ].T
        e_new = 0.5 * np.sum(p_new * (hcore + f))
        if abs(e_new - energy) < tol and np.max(np.abs(p_new - p)) < 1e-10:
            p = p_new
            energy = e_new
            break
        p, energy = p_new, e_new
    # Deterministic orbital signs: largest-magnitude AO coefficient positive.
    for k in range(c.shape[1]):
        j = int(np.argmax(np.abs(c[:, k])))
        if c[j, k] < 0:
            c[:, k] = -c[:, k]
    return energy, c, eps


def mo_transform(hcore, eri, c):
    h_mo = c.T @ hcore @ c
    eri_mo = np.einsum("mnls,mp,nq,lr,st->pqrt", eri, c, c, c, c, optimize=True)
    return h_mo, eri_mo


def fci_ground(h_mo, eri_mo, n_orb, n_alpha, n_beta):
    """Direct FCI lowest eigenvalue (no core), independent determinant algebra."""

    def dets(n_elec):
        return [frozenset(c) for c in itertools.combinations(range(n_orb), n_elec)]

    basis = [(a, b) for a in dets(n_alpha) for b in dets(n_beta)]

    def spin_orbs(a, b):
        return sorted(p for p in a) + sorted(n_orb + p for p in b)

    def element(occ1, occ2):
        s1, s2 = set(occ1), set(occ2)
        diff1 = sorted(s1 - s2)
        diff2 = sorted(s2 - s1)
        if len(diff1) > 2:
            return 0.0

        def orb(p):
            return p % n_orb

        def spin(p):
            return p // n_orb

        def g(p, q, r, s):
            return eri_mo[orb(p), orb(q), orb(r), orb(s)]

        def perm_sign(occ, removed):
            sign = 1
            lst = sorted(occ)
            for r in sorted(removed, reverse=True):
                sign *= (-1) ** lst.index(r)
                lst.remove(r)
            return sign

        if not diff1:
            e = sum(h_mo[orb(p), orb(p)] for p in s1)
            for p, q in itertools.combinations(sorted(s1), 2):
                e += g(p, p, q, q)
                if spin(p) == spin(q):
                    e -= g(p, q, q, p)
            return e
        if len(diff1) == 1:
            a, b = diff1[0], diff2[0]
            if spin(a) != spin(b):
                return 0.0
            sign = perm_sign(s1, [a]) * perm_sign(s2, [b])
            e = h_mo[orb(a), orb(b)]
            for r in sorted(s1 & s2):
                e += g(a, b, r, r)
                if spin(r) == spin(a):
                    e -= g(a, r, r, b)
            return sign * e
        a1, a2 = diff1
        b1, b2 = diff2
        sign = perm_sign(s1, [a1, a2]) * perm_sign(s2, [b1, b2])
        e = 0.0
        if spin(a1) == spin(b1) and spin(a2) == spin(b2):
            e += g(a1, b1, a2, b2)
        if spin(a1) == spin(b2) and spin(a2) == spin(b1):
            e -= g(a1, b2, a2, b1)
        return sign * e

    dim = len(basis)
    mat = np.zeros((dim, dim))
    occs = [spin_orbs(a, b) for a, b in basis]
    for i in range(dim):
        for j in range(dim):
            mat[i, j] = element(occs[i], occs[j])
    evals, evecs = np.linalg.eigh(mat)
    return evals, evecs, basis


def write_fcidump(path, h_mo, eri_mo, e_core, n_elec, ms2=0):
    n = h_mo.shape[0]
    lines = [
        f"&FCI NORB={n},NELEC={n_elec},MS2={ms2},",
        "  ORBSYM=" + ",".join(["1"] * n) + ",",
        "  ISYM=1,",
        "&END",
    ]

    def fmt(value, i, j, k, l):
        return f"{value: .16E} {i:3d} {j:3d} {k:3d} {l:3d}"

    seen = set()
    for p in range(n):
        for q in range(p + 1):
            for r in range(n):
                for s in range(r + 1):
                    if (p, q) < (r, s):
                        continue
                    key = (p, q, r, s)
                    if key in seen:
                        continue
                    seen.add(key)
                    value = eri_mo[p, q, r, s]
                    if abs(value) > 1e-14:
                        lines.append(fmt(value, p + 1, q + 1, r + 1, s + 1))
    for p in range(n):
        for q in range(p + 1):
            if abs(h_mo[p, q]) > 1e-14:
                lines.append(fmt(h_mo[p, q], p + 1, q + 1, 0, 0))
    lines.append(fmt(e_core, 0, 0, 0, 0))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def make_system(name, centers, n_elec):
    s, hcore, eri = build_integrals(centers)
    e_nuc = nuclear_repulsion(centers)
    n_occ = n_elec // 2
    e_hf_elec, c, _ = rhf(s, hcore, eri, n_occ)
    h_mo, eri_mo = mo_transform(hcore, eri, c)
    n = h_mo.shape[0]
    evals, evecs, basis = fci_ground(h_mo, eri_mo, n, n_elec // 2, n_elec - n_elec // 2)
    hf_index = basis.index((frozenset(range(n_occ)), frozenset(range(n_occ))))
    ground = evecs[:, 0]
    here = os.path.dirname(os.path.abspath(__file__))
    write_fcidump(os.path.join(here, f"{name}.fcidump"), h_mo, eri_mo, e_nuc, n_elec)
    return {
        "n_orb": n,
        "n_elec": n_elec,
        "e_nuclear": e_nuc,
        "hf_energy": e_hf_elec + e_nuc,
        "fci_energy": float(evals[0] + e_nuc),
        "fci_e0": float(evals[0]),
        "fci_e1": float(evals[1]),
        "fci_e_max": float(evals[-1]),
        "gamma0_sq": float(ground[hf_index] ** 2),
        "h_diag": [float(h_mo[i, i]) for i in range(n)],
        "h_mo_01": float(h_mo[0, 1]),
        "eri_0000": float(eri_mo[0, 0, 0, 0]),
        "eri_1111": float(eri_mo[1, 1, 1, 1]),
        "eri_0011": float(eri_mo[0, 0, 1, 1]),
        "eri_0101": float(eri_mo[0, 1, 0, 1]),
    }


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    refs = {
        "h2_sto3g": make_system("h2_sto3g", [(0, 0, 0), (0, 0, 1.4)], 2),
        "h4_sto3g": make_system(
            "h4_sto3g", [(0, 0, 0), (0, 0, 1.8), (0, 0, 3.6), (0, 0, 5.4)], 4
        ),
    }
    with open(os.path.join(here, "reference_values.json"), "w") as f:
        json.dump(refs, f, indent=2, sort_keys=True)
        f.write("\n")
    for name, r in refs.items():
        print(name, "HF", r["hf_energy"], "FCI", r["fci_energy"], "gamma0^2", r["gamma0_sq"])


if __name__ == "__main__":
    main()
