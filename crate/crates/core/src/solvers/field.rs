use alloc::boxed::Box;
use alloc::vec::Vec;

/// Right-hand side `f` of `ẋ ∈ f(x) − N(S, x)`.
pub trait VectorField: Sync {
    /// Writes `f(x)` into `out` (same length as `x`).
    fn eval(&self, x: &[f64], out: &mut [f64]);

    /// Lipschitz constant `L_f`, when known.
    fn lipschitz_hint(&self) -> Option<f64> {
        None
    }

    /// Bound `M_f ≥ ‖f(x)‖`, when known.
    fn bound_hint(&self) -> Option<f64> {
        None
    }
}

impl<T: VectorField + ?Sized> VectorField for &T {
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        (**self).eval(x, out)
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        (**self).lipschitz_hint()
    }

    fn bound_hint(&self) -> Option<f64> {
        (**self).bound_hint()
    }
}

impl<T: VectorField + ?Sized + Send> VectorField for Box<T> {
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        (**self).eval(x, out)
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        (**self).lipschitz_hint()
    }

    fn bound_hint(&self) -> Option<f64> {
        (**self).bound_hint()
    }
}

/// `f ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroField;

impl VectorField for ZeroField {
    fn eval(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(0.0)
    }

    fn bound_hint(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Constant field `f ≡ c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantField(pub Vec<f64>);

impl VectorField for ConstantField {
    fn eval(&self, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.0);
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(0.0)
    }

    fn bound_hint(&self) -> Option<f64> {
        Some(crate::linalg::norm(&self.0))
    }
}

/// Linear attraction to the origin, `f(x) = −γ x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearAttraction {
    pub gamma: f64,
}

impl VectorField for LinearAttraction {
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (o, xi) in out.iter_mut().zip(x) {
            *o = -self.gamma * xi;
        }
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(self.gamma.abs())
    }
}

/// Wraps a closure `|x, out| …` as a [`VectorField`].
pub struct FnField<F> {
    f: F,
    lipschitz: Option<f64>,
    bound: Option<f64>,
}

impl<F: Fn(&[f64], &mut [f64]) + Sync> FnField<F> {
    pub fn new(f: F) -> Self {
        FnField {
            f,
            lipschitz: None,
            bound: None,
        }
    }

    pub fn with_hints(mut self, lipschitz: Option<f64>, bound: Option<f64>) -> Self {
        self.lipschitz = lipschitz;
        self.bound = bound;
        self
    }
}

impl<F: Fn(&[f64], &mut [f64]) + Sync> VectorField for FnField<F> {
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        (self.f)(x, out)
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        self.lipschitz
    }

    fn bound_hint(&self) -> Option<f64> {
        self.bound
    }
}
