//! Finite trigonometric polynomials `Σ a_k cos kθ + b_k sin kθ` with exact
//! products and definite integrals. Used to integrate duty-cycle weighted
//! current expressions in closed form over fundamental-period sub-intervals.

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    /// `(a_k, b_k)` indexed by harmonic order k; `b_0` is unused.
    terms: Vec<(f64, f64)>,
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        TrigPoly {
            terms: vec![(c, 0.0)],
        }
    }

    /// `amplitude · sin(k·θ + phase)`.
    pub fn sinusoid(order: usize, amplitude: f64, phase: f64) -> Self {
        let mut p = TrigPoly {
            terms: vec![(0.0, 0.0); order + 1],
        };
        let (s, c) = phase.sin_cos();
        if order == 0 {
            p.terms[0].0 = amplitude * s;
        } else {
            p.terms[order] = (amplitude * s, amplitude * c);
        }
        p
    }

    fn slot(&mut self, k: usize) -> &mut (f64, f64) {
        if self.terms.len() <= k {
            self.terms.resize(k + 1, (0.0, 0.0));
        }
        &mut self.terms[k]
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        for (k, &(a, b)) in other.terms.iter().enumerate() {
            let s = out.slot(k);
            s.0 += a;
            s.1 += b;
        }
        out
    }

    pub fn scale(&self, factor: f64) -> TrigPoly {
        TrigPoly {
            terms: self
                .terms
                .iter()
                .map(|&(a, b)| (a * factor, b * factor))
                .collect(),
        }
    }

    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = TrigPoly::default();
        for (k, &(ak, bk)) in self.terms.iter().enumerate() {
            for (l, &(al, bl)) in other.terms.iter().enumerate() {
                let sum = k + l;
                let diff = k.abs_diff(l);
                // sign of sin((k−l)θ) after folding to a non-negative order
                let sgn = if k >= l { 1.0 } else { -1.0 };
                // cos·cos
                let cc = ak * al * 0.5;
                out.slot(sum).0 += cc;
                out.slot(diff).0 += cc;
                // sin·sin
                let ss = bk * bl * 0.5;
                out.slot(diff).0 += ss;
                out.slot(sum).0 -= ss;
                // sin k · cos l = ½[sin(k+l) + sin(k−l)]
                let sc = bk * al * 0.5;
                out.slot(sum).1 += sc;
                out.slot(diff).1 += sgn * sc;
                // cos k · sin l = ½[sin(k+l) − sin(k−l)]
                let cs = ak * bl * 0.5;
                out.slot(sum).1 += cs;
                out.slot(diff).1 -= sgn * cs;
            }
        }
        // sin(0·θ) terms vanish
        if let Some(t0) = out.terms.first_mut() {
            t0.1 = 0.0;
        }
        out
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.terms
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| {
                if k == 0 {
                    a
                } else {
                    let (s, c) = (k as f64 * theta).sin_cos();
                    a * c + b * s
                }
            })
            .sum()
    }

    /// Exact `∫_from^to p(θ) dθ`.
    pub fn integrate(&self, from: f64, to: f64) -> f64 {
        self.terms
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| {
                if k == 0 {
                    a * (to - from)
                } else {
                    let kf = k as f64;
                    let (s1, c1) = (kf * to).sin_cos();
                    let (s0, c0) = (kf * from).sin_cos();
                    (a * (s1 - s0) - b * (c1 - c0)) / kf
                }
            })
            .sum()
    }
}
