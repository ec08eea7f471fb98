"""Parallel transport, holonomy, and curvature estimation from loops.

Transport solves the right-trivialized equation g'(t) = hat(a(t)) g(t) with
a(t) = -omega_{c(t)}(c'(t)) by composing exponentials of algebra increments.
Later steps multiply on the LEFT, so the result of a full run is the
time-ordered product

    exp(dt a(t_{n-1})) ... exp(dt a(t_1)) exp(dt a(t_0)) g0.

Two steppers are provided: "lie-euler" samples a at the left node of each
interval (first order) and "exp-midpoint" at the interval midpoint (second
order). The integration grid is the union of a uniform grid with the path's
registered corner times, so piecewise-smooth paths never straddle a kink.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .connections import LocalConnectionForm, Surface, sphere_surface
from .liecore import check_rotation, check_unit_quat, exp_so3, log_so3, project_rotation, quat_exp, quat_mul

_MAX_RECORDED = 1024  # sample-recording cap per transport run


@dataclass(frozen=True)
class PathSpec:
    """A path c: [0, 1] -> R^d with its velocity and bookkeeping.

    ``corners`` lists interior parameter values where the velocity may jump;
    the integrators place grid nodes there. ``closed`` declares c(1) = c(0).
    """

    base_dim: int
    position: Callable[[float], np.ndarray]
    velocity: Callable[[float], np.ndarray]
    closed: bool
    kind: str = "custom"
    corners: tuple[float, ...] = ()


@dataclass(frozen=True)
class IntegratorConfig:
    """Stepper selection: method, uniform step count, optional renormalization.

    ``renormalize_every`` re-projects the running product onto the group
    every that many steps (0 disables; drift is negligible for typical runs).
    """

    method: str = "exp-midpoint"
    steps: int = 10_000
    renormalize_every: int = 0

    def __post_init__(self):
        if self.method not in ("lie-euler", "exp-midpoint"):
            raise ValueError(f"unknown method {self.method!r}; use 'lie-euler' or 'exp-midpoint'")
        if self.steps < 1:
            raise ValueError(f"steps must be at least 1, got {self.steps}")
        if self.renormalize_every < 0:
            raise ValueError("renormalize_every must be nonnegative")


@dataclass(frozen=True)
class TransportResult:
    """Final group element plus recorded (t, base point, group element) samples.

    Long runs record at most ~1024 evenly strided samples; the first and
    final states are always included. ``algebra_log`` holds every algebra
    increment input a(t*) when requested at transport time.
    """

    final: np.ndarray
    samples: tuple[tuple[float, np.ndarray, np.ndarray], ...]
    algebra_log: tuple[np.ndarray, ...] | None = None


def integration_grid(steps: int, corners: tuple[float, ...] = ()) -> np.ndarray:
    """Uniform grid on [0, 1] with ``steps`` intervals, merged with corners.

    Corner times strictly inside (0, 1) become grid nodes; nodes closer than
    1e-12 are coalesced (keeping the later one, so 1.0 always survives).
    """
    nodes = np.linspace(0.0, 1.0, steps + 1)
    interior = [float(t) for t in corners if 0.0 < t < 1.0]
    if interior:
        merged = np.unique(np.concatenate([nodes, np.asarray(interior)]))
        out = [merged[0]]
        for t in merged[1:]:
            if t - out[-1] > 1e-12:
                out.append(t)
            else:
                out[-1] = t
        nodes = np.asarray(out)
    return nodes


def _check_dims(form: LocalConnectionForm, path: PathSpec) -> None:
    if form.base_dim != path.base_dim:
        raise ValueError(
            f"dimension mismatch: form '{form.descriptor}' lives on R^{form.base_dim}, "
            f"path '{path.kind}' on R^{path.base_dim}"
        )


def transport(
    form: LocalConnectionForm,
    path: PathSpec,
    g0=None,
    config: IntegratorConfig | None = None,
    record_algebra: bool = False,
) -> TransportResult:
    """Parallel-transport the frame g0 along the path under the given form.

    Parameters
    ----------
    form : LocalConnectionForm
        Connection form; must share the path's base dimension.
    path : PathSpec
        The base path. Corner times registered on it refine the grid.
    g0 : array, optional
        Starting rotation (identity by default).
    config : IntegratorConfig, optional
        Stepper and step count; defaults to exp-midpoint with 10^4 steps.
    record_algebra : bool
        Keep every algebra input a(t*) on the result (memory scales with
        the step count).
    """
    _check_dims(form, path)
    cfg = config or IntegratorConfig()
    g = check_rotation(np.eye(3) if g0 is None else g0)
    # one guarded evaluation validates shapes; the loop uses the raw callable
    form(path.position(0.0), path.velocity(0.0))

    nodes = integration_grid(cfg.steps, path.corners)
    n_int = len(nodes) - 1
    stride = max(1, -(-n_int // _MAX_RECORDED))
    midpoint = cfg.method == "exp-midpoint"
    pos, vel, ev = path.position, path.velocity, form.evaluate
    renorm = cfg.renormalize_every

    samples = [(0.0, np.asarray(pos(0.0), dtype=float), g.copy())]
    alog: list[np.ndarray] = []
    for k in range(n_int):
        t0 = nodes[k]
        dt = nodes[k + 1] - t0
        ts = t0 + 0.5 * dt if midpoint else t0
        a = -np.asarray(ev(np.asarray(pos(ts), dtype=float), np.asarray(vel(ts), dtype=float)), dtype=float)
        if not np.all(np.isfinite(a)):
            raise ValueError(f"non-finite algebra increment at t = {ts!r}")
        if record_algebra:
            alog.append(a)
        g = exp_so3(dt * a) @ g
        if renorm and (k + 1) % renorm == 0:
            g = project_rotation(g)
        if (k + 1) % stride == 0 or k + 1 == n_int:
            t1 = nodes[k + 1]
            samples.append((float(t1), np.asarray(pos(t1), dtype=float), g.copy()))
    return TransportResult(
        final=g,
        samples=tuple(samples),
        algebra_log=tuple(alog) if record_algebra else None,
    )


def transport_quat(
    path: PathSpec,
    q0=None,
    config: IntegratorConfig | None = None,
) -> TransportResult:
    """Transport on the unit-quaternion group under its natural connection.

    The algebra increment is the path velocity itself; steps compose as
    q <- quat_exp(dt a(t*)) q. Projecting the result through the double
    cover reproduces :func:`transport` with the natural SO(3) form on a
    doubled path.
    """
    if path.base_dim != 3:
        raise ValueError("quaternion transport requires a path in R^3")
    cfg = config or IntegratorConfig()
    q = check_unit_quat(np.array([1.0, 0.0, 0.0, 0.0]) if q0 is None else q0, tol=1e-9)

    nodes = integration_grid(cfg.steps, path.corners)
    n_int = len(nodes) - 1
    stride = max(1, -(-n_int // _MAX_RECORDED))
    midpoint = cfg.method == "exp-midpoint"
    pos, vel = path.position, path.velocity
    renorm = cfg.renormalize_every

    samples = [(0.0, np.asarray(pos(0.0), dtype=float), q.copy())]
    for k in range(n_int):
        t0 = nodes[k]
        dt = nodes[k + 1] - t0
        ts = t0 + 0.5 * dt if midpoint else t0
        a = np.asarray(vel(ts), dtype=float)
        if not np.all(np.isfinite(a)):
            raise ValueError(f"non-finite velocity sample at t = {ts!r}")
        q = quat_mul(quat_exp(dt * a), q)
        if renorm and (k + 1) % renorm == 0:
            q = q / np.linalg.norm(q)
        if (k + 1) % stride == 0 or k + 1 == n_int:
            t1 = nodes[k + 1]
            samples.append((float(t1), np.asarray(pos(t1), dtype=float), q.copy()))
    return TransportResult(final=q, samples=tuple(samples))


def holonomy(
    form: LocalConnectionForm,
    loop: PathSpec,
    config: IntegratorConfig | None = None,
) -> np.ndarray:
    """Transport around a closed loop starting from the identity."""
    if not loop.closed:
        raise ValueError(f"holonomy requires a closed path; '{loop.kind}' is not closed")
    return transport(form, loop, np.eye(3), config).final


def time_ordered_product(form: LocalConnectionForm, path: PathSpec, n: int) -> np.ndarray:
    """First-order product approximation of transport on a plain uniform grid.

    Returns exp(dt a(t_{n-1})) ... exp(dt a(t_0)) with dt = 1/n and left
    endpoint sampling; corners are deliberately not merged in, so this equals
    a lie-euler run exactly only when the path is smooth (or its corners land
    on the grid).
    """
    _check_dims(form, path)
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    dt = 1.0 / n
    g = np.eye(3)
    for k in range(n):
        t = k * dt
        a = -form(path.position(t), path.velocity(t))
        g = exp_so3(dt * a) @ g
    return g


def small_loop_curvature(
    form: LocalConnectionForm,
    x,
    u,
    v,
    eps: float,
    config: IntegratorConfig | None = None,
    richardson: bool = False,
) -> np.ndarray:
    """Estimate the curvature Omega_x(u, v) from parallelogram holonomies.

    The circuit x -> x+eps u -> x+eps u+eps v -> x+eps v -> x transports to
    exp(-eps^2 Omega_x(u, v)) up to O(eps^3), so the estimate negates the
    holonomy logarithm. With ``richardson`` the leading O(eps) error term is
    extrapolated away using a second run at eps/2, leaving O(eps^2).

    Raises the :func:`liecurv.liecore.log_so3` domain error when eps is so
    large that the holonomy angle approaches pi.
    """
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")

    def estimate(e: float) -> np.ndarray:
        loop = parallelogram_loop(x, u, v, e)
        hol = transport(form, loop, np.eye(3), config).final
        return -log_so3(hol) / (e * e)

    if richardson:
        return 2.0 * estimate(eps / 2.0) - estimate(eps)
    return estimate(eps)


def commutator_by_flows(xi, eta, t: float) -> np.ndarray:
    """Recover the bracket [xi, eta] = xi x eta from commutated flows.

    Forms C(s) = exp(s xi^) exp(s eta^) exp(-s xi^) exp(-s eta^) and returns
    the symmetric second difference (log C(t) + log C(-t)) / (2 t^2), whose
    error is O(t^2); the one-sided quotient would carry an O(t) term.
    """
    if t <= 0.0:
        raise ValueError(f"t must be positive, got {t}")
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)

    def circuit(s: float) -> np.ndarray:
        return exp_so3(s * xi) @ exp_so3(s * eta) @ exp_so3(-s * xi) @ exp_so3(-s * eta)

    return (log_so3(circuit(t)) + log_so3(circuit(-t))) / (2.0 * t * t)


def convergence_order(
    form: LocalConnectionForm,
    path: PathSpec,
    method: str = "lie-euler",
    n0: int = 64,
    g0=None,
) -> float:
    """Observed order from runs at n0 and 2 n0 steps against a 16 n0 reference.

    Intended for smooth paths where the stepper actually commits truncation
    error. When both runs already sit at roundoff (as on exactly integrable
    paths) the error ratio is meaningless and a ValueError is raised.
    """
    ref = transport(form, path, g0, IntegratorConfig(method=method, steps=16 * n0)).final
    e1 = np.linalg.norm(transport(form, path, g0, IntegratorConfig(method=method, steps=n0)).final - ref)
    e2 = np.linalg.norm(transport(form, path, g0, IntegratorConfig(method=method, steps=2 * n0)).final - ref)
    if e2 < 1e-14 or e1 <= e2:
        raise ValueError(
            f"reference not converged: error ratio non-monotone (e(n0) = {e1:.3e}, e(2 n0) = {e2:.3e})"
        )
    return float(np.log2(e1 / e2))


# ---------------------------------------------------------------------------
# path catalog


def line(x0, xi) -> PathSpec:
    """Straight path c(t) = x0 + t xi."""
    x0 = np.asarray(x0, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if x0.shape != xi.shape or x0.ndim != 1:
        raise ValueError("line expects a point and a displacement of equal dimension")
    return PathSpec(
        base_dim=len(x0),
        position=lambda t: x0 + t * xi,
        velocity=lambda t: xi.copy(),
        closed=bool(np.linalg.norm(xi) == 0.0),
        kind="line",
    )


def circle(center, radius: float, plane=None) -> PathSpec:
    """Closed circle of the given radius around ``center``.

    ``plane`` is a pair of spanning vectors for the circle's plane (defaults
    to the first two coordinate axes); they are orthonormalized and must be
    linearly independent.
    """
    center = np.asarray(center, dtype=float)
    if radius <= 0.0:
        raise ValueError(f"circle radius must be positive, got {radius}")
    d = len(center)
    if plane is None:
        if d < 2:
            raise ValueError("circle needs a base dimension of at least 2")
        b1 = np.zeros(d)
        b1[0] = 1.0
        b2 = np.zeros(d)
        b2[1] = 1.0
    else:
        b1 = np.asarray(plane[0], dtype=float)
        b2 = np.asarray(plane[1], dtype=float)
    n1 = np.linalg.norm(b1)
    if n1 < 1e-12:
        raise ValueError("degenerate circle plane: first spanning vector vanishes")
    b1 = b1 / n1
    b2 = b2 - (b2 @ b1) * b1
    n2 = np.linalg.norm(b2)
    if n2 < 1e-12:
        raise ValueError("degenerate circle plane: spanning vectors are parallel")
    b2 = b2 / n2
    tau = 2.0 * np.pi

    return PathSpec(
        base_dim=d,
        position=lambda t: center + radius * (np.cos(tau * t) * b1 + np.sin(tau * t) * b2),
        velocity=lambda t: radius * tau * (-np.sin(tau * t) * b1 + np.cos(tau * t) * b2),
        closed=True,
        kind="circle",
    )


def polyline(points, times=None, closed: bool | None = None) -> PathSpec:
    """Piecewise-linear path through ``points`` (each row one vertex).

    ``times`` assigns a strictly increasing parameter in [0, 1] to each
    vertex (uniform by default, endpoints pinned to 0 and 1). Interior
    vertex times are registered as corners so integrators land on them.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[0] < 2:
        raise ValueError("polyline needs at least two points")
    m, d = P.shape
    if times is None:
        T = np.linspace(0.0, 1.0, m)
    else:
        T = np.asarray(times, dtype=float)
        if T.shape != (m,):
            raise ValueError(f"times must match the number of points ({m})")
        if np.any(np.diff(T) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if abs(T[0]) > 1e-12 or abs(T[-1] - 1.0) > 1e-12:
            raise ValueError("times must cover [0, 1]")
        T = T.copy()
        T[0], T[-1] = 0.0, 1.0
    slopes = (P[1:] - P[:-1]) / np.diff(T)[:, None]

    gap = float(np.linalg.norm(P[-1] - P[0]))
    if closed is None:
        closed = gap <= 1e-9
    elif closed and gap > 1e-9:
        raise ValueError(f"polyline declared closed but endpoints differ by {gap:.3e}")

    def segment_of(t: float) -> int:
        i = int(np.searchsorted(T, t, side="right")) - 1
        return min(max(i, 0), m - 2)

    def position(t):
        i = segment_of(t)
        return P[i] + (t - T[i]) * slopes[i]

    def velocity(t):
        return slopes[segment_of(t)].copy()

    return PathSpec(
        base_dim=d,
        position=position,
        velocity=velocity,
        closed=bool(closed),
        kind="polyline",
        corners=tuple(float(t) for t in T[1:-1]),
    )


def parallelogram_loop(x, u, v, eps: float) -> PathSpec:
    """Closed parallelogram circuit x -> x+eps u -> x+eps u+eps v -> x+eps v -> x."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if np.linalg.norm(u) == 0.0 or np.linalg.norm(v) == 0.0:
        raise ValueError("parallelogram sides must be nonzero")
    pts = np.array([x, x + eps * u, x + eps * u + eps * v, x + eps * v, x])
    return dataclasses.replace(polyline(pts, closed=True), kind="parallelogram")


def great_arc(p, q, radius: float | None = None, side: str = "outer") -> tuple[PathSpec, Surface]:
    """Shortest great-circle arc from p to q on a sphere, as a chart path.

    Builds a sphere chart whose equator contains the arc (so the path stays
    far from the chart's polar caps) and returns the path in that chart's
    coordinates together with the surface. For antipodal endpoints the
    half-circle plane is chosen deterministically from the coordinate axis
    least aligned with p.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != (3,) or q.shape != (3,):
        raise ValueError("great_arc expects two points in R^3")
    r = float(np.linalg.norm(p)) if radius is None else float(radius)
    if r <= 0.0:
        raise ValueError("sphere radius must be positive")
    for name, pt in (("p", p), ("q", q)):
        if abs(np.linalg.norm(pt) - r) > 1e-9 * max(r, 1.0):
            raise ValueError(f"point {name} does not lie on the sphere of radius {r}")

    w = np.cross(p, q)
    wn = float(np.linalg.norm(w))
    dot = float(p @ q)
    if wn < 1e-12 * r * r:
        if dot > 0.0:
            raise ValueError("great_arc requires distinct points")
        # antipodal: any axis orthogonal to p closes a half circle
        e = np.zeros(3)
        e[int(np.argmin(np.abs(p)))] = 1.0
        w = np.cross(p, e)
        f3 = w / np.linalg.norm(w)
        s = float(np.pi)
    else:
        f3 = w / wn
        s = float(np.arctan2(wn / (r * r), dot / (r * r)))
    f1 = p / r
    f2 = np.cross(f3, f1)

    surface = sphere_surface(r, side=side, frame=(f1, f2, f3))
    half_pi = 0.5 * np.pi
    path = PathSpec(
        base_dim=2,
        position=lambda t: np.array([half_pi, s * t]),
        velocity=lambda t: np.array([0.0, s]),
        closed=False,
        kind="great-arc",
    )
    return path, surface


def path_from_position(
    position: Callable[[float], np.ndarray],
    base_dim: int,
    closed: bool | None = None,
    kind: str = "custom",
    corners: tuple[float, ...] = (),
    h: float = 1e-7,
) -> PathSpec:
    """Wrap a position callable; the velocity comes from central differences.

    Near the parameter boundaries the stencil shrinks to stay inside [0, 1].
    """

    def velocity(t):
        a, b = max(0.0, t - h), min(1.0, t + h)
        pa = np.asarray(position(a), dtype=float)
        pb = np.asarray(position(b), dtype=float)
        return (pb - pa) / (b - a)

    gap = float(np.linalg.norm(np.asarray(position(1.0), float) - np.asarray(position(0.0), float)))
    if closed is None:
        closed = gap <= 1e-9
    elif closed and gap > 1e-9:
        raise ValueError(f"path declared closed but endpoints differ by {gap:.3e}")
    return PathSpec(
        base_dim=base_dim,
        position=lambda t: np.asarray(position(t), dtype=float),
        velocity=velocity,
        closed=bool(closed),
        kind=kind,
        corners=corners,
    )


def reverse_path(path: PathSpec) -> PathSpec:
    """Traverse a path backwards; transport along it inverts the original."""
    return PathSpec(
        base_dim=path.base_dim,
        position=lambda t: path.position(1.0 - t),
        velocity=lambda t: -np.asarray(path.velocity(1.0 - t), dtype=float),
        closed=path.closed,
        kind=path.kind,
        corners=tuple(sorted(1.0 - t for t in path.corners)),
    )


def concat_paths(first: PathSpec, second: PathSpec) -> PathSpec:
    """Run ``first`` on [0, 1/2] and ``second`` on [1/2, 1].

    The endpoint of ``first`` must meet the start of ``second``.
    """
    if first.base_dim != second.base_dim:
        raise ValueError("cannot concatenate paths of different base dimension")
    gap = float(np.linalg.norm(np.asarray(second.position(0.0), float) - np.asarray(first.position(1.0), float)))
    if gap > 1e-9:
        raise ValueError(f"paths do not meet: gap {gap:.3e}")

    def position(t):
        return first.position(2.0 * t) if t < 0.5 else second.position(2.0 * t - 1.0)

    def velocity(t):
        if t < 0.5:
            return 2.0 * np.asarray(first.velocity(2.0 * t), dtype=float)
        return 2.0 * np.asarray(second.velocity(2.0 * t - 1.0), dtype=float)

    corners = tuple(sorted(
        [0.5 * t for t in first.corners] + [0.5] + [0.5 + 0.5 * t for t in second.corners]
    ))
    gap_loop = float(np.linalg.norm(np.asarray(second.position(1.0), float) - np.asarray(first.position(0.0), float)))
    return PathSpec(
        base_dim=first.base_dim,
        position=position,
        velocity=velocity,
        closed=gap_loop <= 1e-9,
        kind="concat",
        corners=corners,
    )


def scale_path(path: PathSpec, factor: float) -> PathSpec:
    """Scale a path pointwise by a constant factor."""
    return PathSpec(
        base_dim=path.base_dim,
        position=lambda t: factor * np.asarray(path.position(t), dtype=float),
        velocity=lambda t: factor * np.asarray(path.velocity(t), dtype=float),
        closed=path.closed,
        kind=path.kind,
        corners=path.corners,
    )
