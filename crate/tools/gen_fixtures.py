"""Generate the committed FCIDUMP fixtures and fixtures/manifest.json.

Requires pyscf. Run from the repository root:

    python3 tools/gen_fixtures.py

Orbitals are canonical RHF orbitals in STO-3G with a deterministic phase
convention: the largest-magnitude AO coefficient of every MO is positive.
Frozen/excluded lists are 0-based MO indices into the full dump.
"""
import hashlib
import json
import math
import os

import numpy as np
from pyscf import ao2mo, gto, scf, symm
from pyscf.tools import fcidump

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "fixtures")

H2_GRID = [0.5, 0.74, 1.0, 1.24, 1.5, 1.74, 2.0, 2.5]
LIH_GRID = [1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.2, 2.4, 2.6, 2.8, 3.0, 3.4, 3.8, 4.2, 4.6, 5.0]
H2O_GRID = [0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.2]
LI2O_GRID = [1.3, 1.45, 1.6, 1.8, 2.0, 2.2, 2.4, 2.7, 3.0, 3.5, 4.0]
H2O_ANGLE = 109.57


def geometry(mol, r):
    if mol == "h2":
        return f"H 0 0 0; H 0 0 {r}"
    if mol == "lih":
        return f"Li 0 0 0; H 0 0 {r}"
    if mol == "h2o":
        half = math.radians(H2O_ANGLE / 2.0)
        x, z = r * math.sin(half), r * math.cos(half)
        return f"O 0 0 0; H {x} 0 {z}; H {-x} 0 {z}"
    if mol == "li2o":
        return f"O 0 0 0; Li 0 0 {r}; Li 0 0 {-r}"
    raise ValueError(mol)


def fix_phase(c):
    c = c.copy()
    for j in range(c.shape[1]):
        k = np.argmax(np.abs(c[:, j]))
        if c[k, j] < 0:
            c[:, j] = -c[:, j]
    return c


def run(mol_id, r, guess_dm=None):
    mol = gto.M(atom=geometry(mol_id, r), basis="sto-3g", symmetry=True, verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.max_cycle = 500
    e = mf.kernel(dm0=guess_dm)
    if not mf.converged:
        mf = scf.newton(mf)
        e = mf.kernel(mf.mo_coeff, mf.mo_occ)
    if not mf.converged:
        raise RuntimeError(f"SCF did not converge for {mol_id} R={r}")
    # stability check; follow internal instabilities to the lowest RHF solution
    for _ in range(5):
        try:
            mo, _, stable, _ = mf.stability(return_status=True)
        except Exception:
            break
        if stable:
            break
        dm = mf.make_rdm1(mo, mf.mo_occ)
        e = mf.kernel(dm0=dm)
    c = fix_phase(mf.mo_coeff)
    labels = symm.label_orb_symm(mol, mol.irrep_name, mol.symm_orb, c)
    return mol, mf, e, c, labels


def frozen_excluded(mol_id, labels):
    if mol_id == "h2":
        return [], []
    if mol_id == "lih":
        # Li 1s frozen; pi orbitals (B1/B2 in the C2v subgroup, E1x/E1y in Coov) excluded
        excl = [i for i, l in enumerate(labels) if l not in ("A1",)]
        return [0], excl
    if mol_id == "h2o":
        return [0], []
    if mol_id == "li2o":
        return [0, 1, 2], []
    raise ValueError(mol_id)


def main():
    os.makedirs(OUT, exist_ok=True)
    entries = []
    grids = [("h2", H2_GRID), ("lih", LIH_GRID), ("h2o", H2O_GRID), ("li2o", LI2O_GRID)]
    for mol_id, grid in grids:
        dm = None
        for r in grid:
            mol, mf, e, c, labels = run(mol_id, r, dm)
            dm = mf.make_rdm1()
            h1 = c.T @ mf.get_hcore() @ c
            eri = ao2mo.restore(8, ao2mo.kernel(mol, c), c.shape[1])
            name = f"{mol_id}_{r:.2f}.fcidump"
            path = os.path.join(OUT, name)
            fcidump.from_integrals(path, h1, eri, c.shape[1], mol.nelectron,
                                   nuc=mol.energy_nuc(), ms=0, tol=1e-14)
            with open(path, "rb") as fh:
                digest = hashlib.sha256(fh.read()).hexdigest()
            frozen, excluded = frozen_excluded(mol_id, labels)
            entries.append({
                "molecule": mol_id,
                "R": r,
                "basis": "sto-3g",
                "file": name,
                "norb": int(c.shape[1]),
                "nelec": int(mol.nelectron),
                "frozen": frozen,
                "excluded": excluded,
                "orbital_labels": list(labels),
                "orbitals": "canonical RHF",
                "rhf_energy": float(e),
                "sha256": digest,
            })
            print(f"{name}: E_RHF={e:.10f} labels={labels}")
    manifest = {
        "generator": "pyscf",
        "phase_convention": "largest-magnitude AO coefficient positive",
        "h2o_angle_deg": H2O_ANGLE,
        "notes": "li2o grid (0.8-2.5 x R_eq) reconstructed from figure axes",
        "entries": entries,
    }
    with open(os.path.join(OUT, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)


if __name__ == "__main__":
    main()
