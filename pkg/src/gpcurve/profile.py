"""The one-dimensional soliton, its linearized operator, correction functions and quadrature constants."""

from dataclasses import dataclass, field, fields
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NonConvergence, Unsolvable
from .numerics import fd_first, fd_second, simpson_weights

PRINTED_LAMBDA0 = 4.0


@dataclass(frozen=True)
class Grid1D:
    x_max: float = 20.0
    n: int = 4001

    def __post_init__(self):
        if self.n % 2 == 0 or self.n < 5:
            raise ValueError("Grid1D needs an odd node count so that 0 is a node")
        if self.x_max < 15:
            raise ValueError("Grid1D needs x_max >= 15")

    @cached_property
    def nodes(self):
        x = np.linspace(-self.x_max, self.x_max, self.n)
        return 0.5 * (x - x[::-1])

    @property
    def h(self):
        return 2.0 * self.x_max / (self.n - 1)

    @cached_property
    def weights(self):
        return simpson_weights(self.n, self.h)

    @cached_property
    def d1(self):
        return fd_first(self.n, self.h)

    @cached_property
    def d2(self):
        return fd_second(self.n, self.h)

    def integrate(self, values, axis=0):
        values = np.asarray(values, dtype=float)
        out = np.tensordot(self.weights, values, axes=([0], [axis]))
        return float(out) if out.ndim == 0 else out

    def refine(self):
        return Grid1D(self.x_max, 2 * self.n - 1)


@dataclass(frozen=True)
class ConstantsTable:
    rho0: float
    rho1: float
    rho2: float
    rho3: float
    rho4: float
    rho_p: float
    d1: float
    d2: float
    d3: float
    d4: float
    d5: float
    d6: float
    d7: float
    d8: float
    d9: float
    b0: float
    b1: float
    b2: float
    b3: float
    b4: float
    b5: float
    b6: float
    b7: float
    lambda0: float
    extra: dict = field(default_factory=dict, compare=False)

    def as_dict(self):
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "extra"}
        out.update(self.extra)
        return out


DEFINITIONS = {
    "rho0": "int U^2",
    "rho1": "int U'^2",
    "rho2": "int (x U')^2",
    "rho3": "int (x U'')^2",
    "rho4": "int (x^2 U'')^2",
    "rho_p": "int U^4",
    "d1": "int (Z' + 2/3 x Z) U'",
    "d2": "6 int U Z varpi1 U'",
    "d3": "int x^3 U U'",
    "d4": "int x^2 U'^2",
    "d5": "int x^3 U'' U'",
    "d6": "-8 pi^2 int x Z U'",
    "d7": "-8 pi^2 int Z' U'",
    "d8": "int Z' U'",
    "d9": "2/3 int varpi2' U'",
    "b0": "int Z^2",
    "b1": "int U Z^3",
    "b2": "int Z^4",
    "b3": "int varpi2 Z",
    "b4": "int x U' Z",
    "b5": "int U Z",
    "b6": "int U'' Z",
    "b7": "int varpi1' Z",
    "lambda0": "leading eigenvalue of h'' - h + 3U^2 h",
}


class SolitonProfile:
    """U = sqrt(2) sech x sampled on a grid, with the leading eigenpair of its linearization."""

    def __init__(self, grid, U, lambda0, Z):
        self.grid = grid
        self.U = U
        self.dU = grid.d1 @ U
        self.d2U = grid.d2 @ U
        self.lambda0 = float(lambda0)
        self.Z = Z
        self.dZ = grid.d1 @ Z
        self.d2Z = grid.d2 @ Z
        for arr in (self.U, self.dU, self.d2U, self.Z, self.dZ, self.d2Z):
            arr.setflags(write=False)

    @property
    def x(self):
        return self.grid.nodes

    def integrate(self, values, axis=0):
        return self.grid.integrate(values, axis=axis)

    def apply_L(self, phi):
        """phi'' - phi + 3U^2 phi with the same stencil used everywhere else."""
        return self.grid.d2 @ phi - phi + 3.0 * self.U**2 * phi

    def residual(self):
        r = self.grid.d2 @ self.U - self.U + self.U**3
        return float(np.max(np.abs(r[1:-1])))

    @cached_property
    def interior_L(self):
        core = self.grid.d2[1:-1, 1:-1] + sp.diags(3.0 * self.U[1:-1] ** 2 - 1.0)
        return core.tocsc()

    @cached_property
    def basis(self):
        return correction_basis(self)

    @cached_property
    def constants(self):
        return profile_constants(self)


def compute_profile(grid=None, newton_tol=1e-10, max_iter=100):
    """Newton iteration for U'' - U + U^3 = 0 with zero Dirichlet ends."""
    if grid is None:
        grid = Grid1D()
    if not 0 < newton_tol <= 1e-6:
        raise ValueError("newton_tol must lie in (0, 1e-6]")
    x = grid.nodes
    d2 = grid.d2[1:-1, 1:-1].tocsc()
    u = 1.5 / np.cosh(0.8 * x[1:-1])
    for _ in range(max_iter):
        res = d2 @ u - u + u**3
        if np.max(np.abs(res)) < newton_tol:
            break
        jac = (d2 + sp.diags(3.0 * u**2 - 1.0)).tocsc()
        u = u - spla.spsolve(jac, res)
        u = 0.5 * (u + u[::-1])
    else:
        raise NonConvergence("soliton Newton iteration did not converge in %d steps" % max_iter)
    if np.any(u <= 0):
        raise NonConvergence("Newton converged to a profile that is not positive")
    U = np.zeros(grid.n)
    U[1:-1] = u
    pairs = _top_eigenpairs(grid, U, 1)
    lam, Z = pairs[0]
    return SolitonProfile(grid, U, lam, Z)


def _top_eigenpairs(grid, U, k):
    # Shift-invert Lanczos above the spectrum: the operator is bounded above by its top eigenvalue,
    # so the eigenvalues nearest the shift are the largest ones.
    op = (grid.d2[1:-1, 1:-1] + sp.diags(3.0 * U[1:-1] ** 2 - 1.0)).tocsc()
    shift = float(np.max(3.0 * U**2 - 1.0)) + 1.0
    v0 = np.exp(-grid.nodes[1:-1] ** 2) * (1.0 + 0.1 * grid.nodes[1:-1])
    vals, vecs = spla.eigsh(op, k=k, sigma=shift, which="LM", v0=v0, tol=1e-14)
    order = np.argsort(vals)[::-1]
    out = []
    for j in order:
        v = np.zeros(grid.n)
        v[1:-1] = vecs[:, j]
        v /= np.sqrt(grid.integrate(v * v))
        pivot = np.argmax(np.abs(v))
        if v[pivot] < 0:
            v = -v
        out.append((float(vals[j]), v))
    return out


def linearization_spectrum(profile, k_eigs=2):
    """Leading eigenpairs of h'' - h + 3U^2 h, sorted by decreasing eigenvalue."""
    if k_eigs < 1:
        raise ValueError("k_eigs must be positive")
    return _top_eigenpairs(profile.grid, profile.U, k_eigs)


def lambda0_report(profile):
    return {
        "computed": profile.lambda0,
        "printed": PRINTED_LAMBDA0,
        "consistent": bool(abs(profile.lambda0 - PRINTED_LAMBDA0) < 1e-3),
    }


def solve_projected_line(profile, rhs, project_out=("dU",), tol=1e-8, return_multipliers=False):
    """Solve phi'' - phi + 3U^2 phi = -rhs + c U' + d Z with phi orthogonal to U' (and Z if requested).

    Raises Unsolvable when rhs has a U' component and U' is not among the projected directions.
    """
    grid = profile.grid
    rhs = np.asarray(rhs, dtype=float)
    names = set(project_out)
    unknown = names - {"dU", "Z"}
    if unknown:
        raise ValueError("unknown projection directions: %s" % sorted(unknown))
    if "dU" not in names:
        tilt = profile.integrate(rhs * profile.dU)
        if abs(tilt) > tol * max(1.0, float(np.max(np.abs(rhs)))):
            raise Unsolvable("right-hand side has U' component %.3e" % tilt)
    dirs = [profile.dU]
    if "Z" in names:
        dirs.append(profile.Z)
    w = grid.weights[1:-1]
    cols = np.column_stack([-d[1:-1] for d in dirs])
    rows = np.vstack([w * d[1:-1] for d in dirs])
    k = len(dirs)
    mat = sp.bmat([[profile.interior_L, sp.csc_matrix(cols)], [sp.csr_matrix(rows), None]]).tocsc()
    b = np.concatenate([-rhs[1:-1], np.zeros(k)])
    sol = spla.spsolve(mat, b)
    phi = np.zeros(grid.n)
    phi[1:-1] = sol[:-k]
    if return_multipliers:
        mult = dict(zip(["dU", "Z"][:k], sol[-k:]))
        return phi, mult
    return phi


def _sources(profile, varpi1=None):
    x, U, dU, d2U = profile.x, profile.U, profile.dU, profile.d2U
    first = [dU + (2.0 / 3.0) * x * U, U, x**2 * U, x * dU, x**2 * d2U]
    if varpi1 is None:
        return first
    return first + [profile.grid.d1 @ varpi1, x * varpi1, U * varpi1**2]


class CorrectionBasis:
    """The eight correction functions varpi_1..varpi_8 with their x-derivatives."""

    def __init__(self, profile, values):
        self.profile = profile
        self.values = {k: v for k, v in values.items()}
        g = profile.grid
        self.dx = {k: g.d1 @ v for k, v in values.items()}
        self.dxx = {k: g.d2 @ v for k, v in values.items()}

    def __getitem__(self, k):
        return self.values[k]

    def sources(self):
        s = _sources(self.profile, self.values[1])
        return {k + 1: s[k] for k in range(8)}

    def residuals(self):
        """Max-norm residual of L varpi_k + g_k on the interior."""
        out = {}
        for k, g in self.sources().items():
            r = self.profile.apply_L(self.values[k]) + g
            out[k] = float(np.max(np.abs(r[1:-1])))
        return out

    def parity(self):
        """Expected parity and measured asymmetry of each varpi_k."""
        odd = {1}
        out = {}
        for k, v in self.values.items():
            sign = -1.0 if k in odd else 1.0
            out[k] = ("odd" if k in odd else "even", float(np.max(np.abs(v - sign * v[::-1]))))
        return out


def correction_basis(profile):
    values = {}
    first = _sources(profile)
    for k, g in enumerate(first, start=1):
        values[k] = solve_projected_line(profile, g, project_out=("dU",))
    varpi1 = values[1]
    for k, g in enumerate(_sources(profile, varpi1)[5:], start=6):
        values[k] = solve_projected_line(profile, g, project_out=("dU",))
    return CorrectionBasis(profile, values)


def profile_constants(profile):
    """All scalar quadrature constants, including those that involve varpi_1 and varpi_2."""
    q = profile.integrate
    x, U, dU, d2U = profile.x, profile.U, profile.dU, profile.d2U
    Z, dZ = profile.Z, profile.dZ
    basis = profile.basis
    w1, w2 = basis[1], basis[2]
    dw1, dw2 = basis.dx[1], basis.dx[2]
    pi2 = np.pi**2
    return ConstantsTable(
        rho0=q(U**2),
        rho1=q(dU**2),
        rho2=q((x * dU) ** 2),
        rho3=q((x * d2U) ** 2),
        rho4=q((x**2 * d2U) ** 2),
        rho_p=q(U**4),
        d1=q((dZ + (2.0 / 3.0) * x * Z) * dU),
        d2=6.0 * q(U * Z * w1 * dU),
        d3=q(x**3 * U * dU),
        d4=q(x**2 * dU**2),
        d5=q(x**3 * d2U * dU),
        d6=-8.0 * pi2 * q(x * Z * dU),
        d7=-8.0 * pi2 * q(dZ * dU),
        d8=q(dZ * dU),
        d9=(2.0 / 3.0) * q(dw2 * dU),
        b0=q(Z**2),
        b1=q(U * Z**3),
        b2=q(Z**4),
        b3=q(w2 * Z),
        b4=q(x * dU * Z),
        b5=q(U * Z),
        b6=q(d2U * Z),
        b7=q(dw1 * Z),
        lambda0=profile.lambda0,
        extra={
            "int_x_U_dU": q(x * U * dU),
            "int_x2_U_d2U": q(x**2 * U * d2U),
            "four_int_dU_cubed": 4.0 * q(dU**3),
            "int_U4_times_3": 3.0 * q(U**4),
            "int_x_dZ_Z": q(x * dZ * Z),
        },
    )
