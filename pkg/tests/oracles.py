"""Independent reference computations, written without the library's formulas."""

import math


def brute_force_ttr(pos, heading, speed, line_point, line_heading, dt, t_max):
    """First time the point moving from ``pos`` crosses the other path's line.

    Found by stepping and watching the sign of the cross product flip.
    """
    ux, uy = math.cos(heading), math.sin(heading)
    lx, ly = math.cos(line_heading), math.sin(line_heading)

    def side(t):
        x, y = pos[0] + ux * speed * t, pos[1] + uy * speed * t
        return lx * (y - line_point[1]) - ly * (x - line_point[0])

    s0 = side(0.0)
    n = int(t_max / dt)
    for k in range(1, n + 1):
        s = side(k * dt)
        if s == 0 or (s > 0) != (s0 > 0):
            return k * dt
    return None


def brute_force_ttc(ego_pos, ego_heading, ve, tgt_pos, th, vt, delta, dt=1e-3, t_max=30.0):
    te = brute_force_ttr(ego_pos, ego_heading, ve, tgt_pos, th, dt, t_max)
    tt = brute_force_ttr(tgt_pos, th, vt, ego_pos, ego_heading, dt, t_max)
    if te is None or tt is None:
        return None, te, tt
    return (min(te, tt) if abs(te - tt) <= delta else None), te, tt


def integrate_profile(v0, A, alpha, T, n=20000):
    """RK4 on (s, v) under a(t) = A exp(alpha t)."""
    h = T / n
    s, v = 0.0, v0
    for k in range(n):
        t = k * h

        def acc(tt):
            return A * math.exp(alpha * tt)

        k1v, k1s = acc(t), v
        k2v, k2s = acc(t + h / 2), v + h / 2 * k1v
        k3v, k3s = acc(t + h / 2), v + h / 2 * k2v
        k4v, k4s = acc(t + h), v + h * k3v
        v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        s += h / 6 * (k1s + 2 * k2s + 2 * k3s + k4s)
    return v, s


def polygon_overlap(p, q):
    """Convex polygon overlap via edge crossings and containment."""
    def inside(pt, poly):
        sign = 0
        for i in range(len(poly)):
            a, b = poly[i], poly[(i + 1) % len(poly)]
            c = (b[0] - a[0]) * (pt[1] - a[1]) - (b[1] - a[1]) * (pt[0] - a[0])
            if c != 0:
                if sign == 0:
                    sign = 1 if c > 0 else -1
                elif (c > 0) != (sign > 0):
                    return False
        return True

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def seg_x(a, b, c, d):
        d1, d2 = cross(c, d, a), cross(c, d, b)
        d3, d4 = cross(a, b, c), cross(a, b, d)
        if d1 == d2 == d3 == d4 == 0:
            # collinear: the projections must overlap
            return (min(a[0], b[0]) <= max(c[0], d[0]) and min(c[0], d[0]) <= max(a[0], b[0])
                    and min(a[1], b[1]) <= max(c[1], d[1]) and min(c[1], d[1]) <= max(a[1], b[1]))
        return (d1 * d2 <= 0) and (d3 * d4 <= 0)

    for i in range(len(p)):
        for j in range(len(q)):
            if seg_x(p[i], p[(i + 1) % len(p)], q[j], q[(j + 1) % len(q)]):
                return True
    return inside(p[0], q) or inside(q[0], p)


def staged_bd_fine(v0, mu, dt=1e-5):
    """Staged braking distance with an explicit fine-step lag model."""
    g, tau, amax = 9.81, 0.15, 11.0
    lim = mu * g
    v, s, lag, t, tb = v0, 0.0, 0.0, 0.0, None
    while v > 0:
        if v <= 20 / 3.6:
            lvl = 10.5
        elif v <= 45 / 3.6:
            tb = t if tb is None else tb
            lvl = 8.5 if t - tb < 0.3 else 9.5
        else:
            lvl = 8.5
        lag += (min(lvl, lim) / amax - lag) * (dt / tau)
        dec = min(lag * amax, lim)
        vn = max(v - dec * dt, 0.0)
        s += 0.5 * (v + vn) * dt
        v, t = vn, t + dt
    return s
