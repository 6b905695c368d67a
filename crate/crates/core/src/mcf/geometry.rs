use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField, VectorField2};
use crate::torus_map::TorusMap;

/// An immersion `F(p) = (p + v(p), p + w(p))` of the torus into `T² × T²`,
/// written in covering coordinates `(x₁, y₁, x₂, y₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    /// Displacement of the first (base) factor.
    pub first: VectorField2,
    /// Displacement of the second factor.
    pub second: VectorField2,
}

impl Embedding {
    /// The graph `p ↦ (p, f(p))`.
    pub fn graph(f: &TorusMap) -> Self {
        Embedding { first: VectorField2::zeros(*f.grid()), second: f.displacement().clone() }
    }

    pub fn grid(&self) -> &GridSpec {
        self.first.grid()
    }

    /// `F + dt · V` for an ambient field `V` along the surface.
    pub fn advance(&self, velocity: &[ScalarField; 4], dt: f64) -> Self {
        Embedding {
            first: VectorField2::new(self.first.x.axpy(dt, &velocity[0]), self.first.y.axpy(dt, &velocity[1])),
            second: VectorField2::new(self.second.x.axpy(dt, &velocity[2]), self.second.y.axpy(dt, &velocity[3])),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.first.is_finite() && self.second.is_finite()
    }

    /// Reparametrize as a graph over the first factor: `f = F₂ ∘ F₁⁻¹`.
    pub fn regraph(&self) -> Result<TorusMap> {
        let base = TorusMap::from_displacement(self.first.clone())?;
        let target = TorusMap::from_displacement(self.second.clone())?;
        let inv = base.invert()?;
        Ok(target.compose(&inv))
    }
}

/// Induced metric, tangent frame and mean curvature of an [`Embedding`].
#[derive(Clone, Debug)]
pub struct SurfaceGeometry {
    /// `tangents[i][A]`: ambient component `A` of `e_i = ∂_i F`.
    pub tangents: [[ScalarField; 4]; 2],
    pub g11: ScalarField,
    pub g12: ScalarField,
    pub g22: ScalarField,
    pub inv11: ScalarField,
    pub inv12: ScalarField,
    pub inv22: ScalarField,
    pub sqrt_det_g: ScalarField,
    /// Ambient components of `H = Δ_g F`.
    pub mean_curvature: [ScalarField; 4],
}

impl SurfaceGeometry {
    pub fn of(emb: &Embedding) -> Result<Self> {
        let grid = *emb.grid();
        let len = grid.len();
        let one = |f: ScalarField| f.map(|v| 1.0 + v);
        let (v, w) = (&emb.first, &emb.second);
        let ex = [one(v.x.dx()), v.y.dx(), one(w.x.dx()), w.y.dx()];
        let ey = [v.x.dy(), one(v.y.dy()), w.x.dy(), one(w.y.dy())];

        let mut g11 = vec![0.0; len];
        let mut g12 = vec![0.0; len];
        let mut g22 = vec![0.0; len];
        let mut i11 = vec![0.0; len];
        let mut i12 = vec![0.0; len];
        let mut i22 = vec![0.0; len];
        let mut sq = vec![0.0; len];
        for k in 0..len {
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for comp in 0..4 {
                let (p, q) = (ex[comp].values()[k], ey[comp].values()[k]);
                a += p * p;
                b += p * q;
                c += q * q;
            }
            let det = a * c - b * b;
            if !(det > 0.0) {
                return Err(Error::DegenerateMetric { i: k / grid.n(), j: k % grid.n(), det });
            }
            g11[k] = a;
            g12[k] = b;
            g22[k] = c;
            i11[k] = c / det;
            i12[k] = -b / det;
            i22[k] = a / det;
            sq[k] = det.sqrt();
        }
        let field = |v: Vec<f64>| ScalarField::from_values(grid, v).expect("grid-sized");
        let (g11, g12, g22) = (field(g11), field(g12), field(g22));
        let (inv11, inv12, inv22, sqrt_det_g) = (field(i11), field(i12), field(i22), field(sq));

        let mean_curvature = std::array::from_fn(|comp| {
            let mut fx = vec![0.0; len];
            let mut fy = vec![0.0; len];
            for k in 0..len {
                let s = sqrt_det_g.values()[k];
                let (p, q) = (ex[comp].values()[k], ey[comp].values()[k]);
                fx[k] = s * (inv11.values()[k] * p + inv12.values()[k] * q);
                fy[k] = s * (inv12.values()[k] * p + inv22.values()[k] * q);
            }
            let div = field(fx).dx().add(&field(fy).dy());
            div.zip_map(&sqrt_det_g, |d, s| d / s)
        });
        Ok(SurfaceGeometry { tangents: [ex, ey], g11, g12, g22, inv11, inv12, inv22, sqrt_det_g, mean_curvature })
    }

    pub fn grid(&self) -> &GridSpec {
        self.g11.grid()
    }

    pub fn area(&self) -> f64 {
        self.sqrt_det_g.integrate()
    }

    /// Largest pointwise Euclidean norm of `H`.
    pub fn max_mean_curvature(&self) -> f64 {
        let h = &self.mean_curvature;
        (0..self.grid().len())
            .map(|k| h.iter().map(|c| c.values()[k].powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// `∫ |H|² √det g`, the instantaneous rate of area loss.
    pub fn dissipation(&self) -> f64 {
        let h = &self.mean_curvature;
        let g = *self.grid();
        let v: Vec<f64> = (0..g.len())
            .map(|k| h.iter().map(|c| c.values()[k].powi(2)).sum::<f64>() * self.sqrt_det_g.values()[k])
            .collect();
        ScalarField::from_values(g, v).expect("grid-sized").integrate()
    }

    /// Largest eigenvalue of `gⁱʲ` over the grid.
    pub fn max_inverse_metric_eigenvalue(&self) -> f64 {
        (0..self.grid().len())
            .map(|k| {
                let (a, b, c) = (self.inv11.values()[k], self.inv12.values()[k], self.inv22.values()[k]);
                0.5 * (a + c) + (0.25 * (a - c) * (a - c) + b * b).sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Largest norm of the tangential projection of `H`.
    pub fn max_tangential_component(&self) -> f64 {
        let h = &self.mean_curvature;
        let [ex, ey] = &self.tangents;
        (0..self.grid().len())
            .map(|k| {
                let hx: f64 = (0..4).map(|c| h[c].values()[k] * ex[c].values()[k]).sum();
                let hy: f64 = (0..4).map(|c| h[c].values()[k] * ey[c].values()[k]).sum();
                let (a, b, c) = (self.inv11.values()[k], self.inv12.values()[k], self.inv22.values()[k]);
                (hx * (a * hx + b * hy) + hy * (b * hx + c * hy)).max(0.0).sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|⟨H, e_i⟩| / (|H| |e_i|)` over nodes where `|H| > floor`.
    pub fn max_normalized_tangential(&self, floor: f64) -> f64 {
        let h = &self.mean_curvature;
        let mut worst = 0.0f64;
        for k in 0..self.grid().len() {
            let hn = h.iter().map(|c| c.values()[k].powi(2)).sum::<f64>().sqrt();
            if hn <= floor {
                continue;
            }
            for e in &self.tangents {
                let en = e.iter().map(|c| c.values()[k].powi(2)).sum::<f64>().sqrt();
                let dot: f64 = (0..4).map(|c| h[c].values()[k] * e[c].values()[k]).sum();
                worst = worst.max(dot.abs() / (hn * en));
            }
        }
        worst
    }

    /// `ω′(e₁, e₂)` with `ω′ = ω ⊖ ω`; vanishes exactly on Lagrangian surfaces.
    pub fn lagrangian_form(&self) -> ScalarField {
        let [ex, ey] = &self.tangents;
        let g = *self.grid();
        let v = (0..g.len())
            .map(|k| {
                let e = |f: &ScalarField| f.values()[k];
                (e(&ex[0]) * e(&ey[1]) - e(&ex[1]) * e(&ey[0])) - (e(&ex[2]) * e(&ey[3]) - e(&ex[3]) * e(&ey[2]))
            })
            .collect();
        ScalarField::from_values(g, v).expect("grid-sized")
    }
}
