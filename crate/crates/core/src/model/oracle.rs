//! Derivative-free maximizer of the line problem, independent of the
//! closed form except for where it centers its search grid.

use super::{marginal_cost, Destination, Firm, LineSolution, ModelError, ModelParams};
use crate::Scalar;

/// Grid and polish settings for [`brute_force_profit_max_with`].
#[derive(Debug, Clone, Copy)]
pub struct OracleSettings {
    /// Points per axis of the log-spaced grid.
    pub grid_points: usize,
    /// Half-width of the grid in decades around its center.
    pub decades: f64,
    /// Coordinate-descent stopping tolerance on log-coordinate moves.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            grid_points: 401,
            decades: 4.0,
            tolerance: 1e-10,
            max_sweeps: 20_000,
        }
    }
}

struct Objective<T> {
    ln_scale: T,
    theta: T,
    a: T,
    cost: T,
    k: T,
}

impl<T: Scalar> Objective<T> {
    /// Profit gross of the fixed cost at `x = e^u`, `quality = e^v`.
    fn eval(&self, u: T, v: T) -> T {
        (self.ln_scale + self.theta * u + self.a * v).exp() - self.cost * u.exp() - self.k * v.exp()
    }

    /// Quality plays no role; `quality = 0`.
    fn eval_ces(&self, u: T) -> T {
        (self.ln_scale + self.theta * u).exp() - self.cost * u.exp()
    }
}

/// Grid-then-polish maximization of the substituted line objective.
///
/// Scans a 401 x 401 log-spaced grid spanning four decades either side of
/// the stationary point, then polishes the best cell by coordinate descent in
/// log coordinates. When the best grid cell lies on the grid boundary the
/// objective keeps improving outward and the problem is reported as
/// [`ModelError::Unbounded`]. Accepts unvalidated parameters on purpose.
pub fn brute_force_profit_max<T: Scalar>(
    params: &ModelParams<T>,
    dest: &Destination<T>,
    firm: &Firm<T>,
) -> Result<LineSolution<T>, ModelError> {
    brute_force_profit_max_with(params, dest, firm, OracleSettings::default())
}

pub fn brute_force_profit_max_with<T: Scalar>(
    params: &ModelParams<T>,
    dest: &Destination<T>,
    firm: &Firm<T>,
    settings: OracleSettings,
) -> Result<LineSolution<T>, ModelError> {
    let cost = marginal_cost(params, firm.z, firm.c_current)?;
    let one = T::one();
    let rho = params.rho;
    let obj = Objective {
        ln_scale: dest.income.ln() / rho + dest.price_index.ln(),
        theta: (rho - one) / rho,
        a: (rho - one) * dest.zeta / rho,
        cost,
        k: params.quality_cost / firm.xi,
    };
    let n = settings.grid_points.max(3);
    let span = T::lit(settings.decades * std::f64::consts::LN_10);
    let step = span * T::lit(2.0) / T::lit((n - 1) as f64);
    let tol = T::lit(settings.tolerance);

    // ln x of the CES optimum; used as the center when quality is irrelevant
    // or when the stationary point degenerates.
    let u_ces = rho * (obj.ln_scale + obj.theta.ln() - cost.ln());

    let (u, v) = if dest.zeta == T::zero() {
        let u0 = u_ces - span;
        let mut best = (0usize, T::neg_infinity());
        for i in 0..n {
            let val = obj.eval_ces(u0 + step * T::lit(i as f64));
            if val > best.1 {
                best = (i, val);
            }
        }
        if best.0 == 0 || best.0 == n - 1 {
            return Err(ModelError::Unbounded { destination: dest.id.clone() });
        }
        let mut u = u0 + step * T::lit(best.0 as f64);
        let mut h = step;
        for _ in 0..settings.max_sweeps {
            let next = line_max(|t| obj.eval_ces(t), u, h);
            let moved = (next - u).abs();
            u = next;
            if moved < tol {
                break;
            }
            h = (moved * T::lit(4.0)).max(T::lit(1e-7));
        }
        (u, T::neg_infinity())
    } else {
        let e = (rho - one) * dest.zeta - one;
        let (uc, vc) = if e.abs() > T::lit(1e-6) {
            let ln_k = obj.k.ln();
            let uc = rho / e
                * ((one - obj.a) * cost.ln() + obj.a * ln_k - obj.ln_scale - obj.theta.ln() - obj.a * dest.zeta.ln());
            let vc = dest.zeta.ln() + cost.ln() + uc - ln_k;
            (uc, vc)
        } else {
            (u_ces, u_ces + cost.ln() - obj.k.ln())
        };
        let u0 = uc - span;
        let v0 = vc - span;
        let mut best = (0usize, 0usize, T::neg_infinity());
        for i in 0..n {
            let u = u0 + step * T::lit(i as f64);
            for j in 0..n {
                let val = obj.eval(u, v0 + step * T::lit(j as f64));
                if val > best.2 {
                    best = (i, j, val);
                }
            }
        }
        let (bi, bj, _) = best;
        if bi == 0 || bj == 0 || bi == n - 1 || bj == n - 1 {
            return Err(ModelError::Unbounded { destination: dest.id.clone() });
        }
        let mut u = u0 + step * T::lit(bi as f64);
        let mut v = v0 + step * T::lit(bj as f64);
        let (mut hu, mut hv) = (step, step);
        let mut stalls = 0;
        let mut current = obj.eval(u, v);
        for _ in 0..settings.max_sweeps {
            let nu = line_max(|t| obj.eval(t, v), u, hu);
            let nv = line_max(|t| obj.eval(nu, t), v, hv);
            let moved = (nu - u).abs().max((nv - v).abs());
            hu = ((nu - u).abs() * T::lit(4.0)).max(T::lit(1e-7));
            hv = ((nv - v).abs() * T::lit(4.0)).max(T::lit(1e-7));
            u = nu;
            v = nv;
            let value = obj.eval(u, v);
            if moved < tol {
                break;
            }
            // Moves at the rounding floor of the objective no longer improve it.
            if value <= current {
                stalls += 1;
                if stalls >= 5 {
                    break;
                }
            } else {
                stalls = 0;
            }
            current = value;
        }
        (u, v)
    };

    let quantity = u.exp();
    let quality = if dest.zeta == T::zero() { T::zero() } else { v.exp() };
    let gross = if dest.zeta == T::zero() {
        obj.eval_ces(u)
    } else {
        obj.eval(u, v)
    };
    let profit = gross - dest.fixed_cost;
    if profit < T::zero() {
        return Ok(LineSolution::inactive());
    }
    let ln_price = -u / rho + obj.ln_scale + if dest.zeta == T::zero() { T::zero() } else { obj.a * v };
    Ok(LineSolution {
        quality,
        quantity,
        price: ln_price.exp(),
        profit,
        active: true,
    })
}

/// Maximizes a unimodal `f` near `x0`: expands a bracket of half-width `h`
/// until both ends are lower than an interior point, then golden-section search.
fn line_max<T: Scalar, F: Fn(T) -> T>(f: F, x0: T, h: T) -> T {
    let two = T::lit(2.0);
    let mut h = h;
    let mut lo = x0 - h;
    let mut hi = x0 + h;
    let mut mid = x0;
    let mut fmid = f(mid);
    for _ in 0..200 {
        let flo = f(lo);
        let fhi = f(hi);
        if fhi > fmid && fhi >= flo {
            lo = mid;
            mid = hi;
            fmid = fhi;
            h = h * two;
            hi = mid + h;
        } else if flo > fmid {
            hi = mid;
            mid = lo;
            fmid = flo;
            h = h * two;
            lo = mid - h;
        } else {
            break;
        }
    }
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= T::epsilon() * T::lit(4.0) * (T::one() + mid.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    let x = (a + b) / two;
    // keep the best point seen if the bracket drifted into flat noise
    if f(x) >= fmid {
        x
    } else {
        mid
    }
}
