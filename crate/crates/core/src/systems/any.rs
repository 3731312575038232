//! Runtime-selected systems, for drivers that pick a system from a config.

use super::{
    CirclePoint, DynamicalSystem, FiniteSystem, Product, Resolution, Rotation, ShiftSystem,
    SymbolicPoint, TowerPoint, TowerSystem,
};
use crate::Result;

#[derive(Clone, Debug)]
pub enum AnySystem {
    Rotation(Rotation),
    Tower(TowerSystem),
    Shift(ShiftSystem),
    Finite(FiniteSystem),
    Product(Box<Product<AnySystem, AnySystem>>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnyPoint {
    Circle(CirclePoint),
    Tower(TowerPoint),
    Symbolic(SymbolicPoint),
    Finite(usize),
    Pair(Box<(AnyPoint, AnyPoint)>),
}

impl AnySystem {
    pub fn product(a: AnySystem, b: AnySystem) -> Self {
        Self::Product(Box::new(super::product_system(a, b)))
    }
}

fn mismatch(sys: &AnySystem, p: &AnyPoint) -> ! {
    panic!("point {p:?} does not belong to {}", sys.label())
}

macro_rules! dispatch_unary {
    ($self:ident, $x:ident, $method:ident $(, $arg:expr)*) => {
        match ($self, $x) {
            (AnySystem::Rotation(s), AnyPoint::Circle(p)) => s.$method(p $(, $arg)*).map(AnyPoint::Circle),
            (AnySystem::Tower(s), AnyPoint::Tower(p)) => s.$method(p $(, $arg)*).map(AnyPoint::Tower),
            (AnySystem::Shift(s), AnyPoint::Symbolic(p)) => s.$method(p $(, $arg)*).map(AnyPoint::Symbolic),
            (AnySystem::Finite(s), AnyPoint::Finite(p)) => s.$method(p $(, $arg)*).map(AnyPoint::Finite),
            (AnySystem::Product(s), AnyPoint::Pair(p)) => {
                s.$method(p $(, $arg)*).map(|q| AnyPoint::Pair(Box::new(q)))
            }
            (s, p) => mismatch(s, p),
        }
    };
}

impl DynamicalSystem for AnySystem {
    type Point = AnyPoint;

    fn distance(&self, x: &AnyPoint, y: &AnyPoint) -> f64 {
        match (self, x, y) {
            (Self::Rotation(s), AnyPoint::Circle(p), AnyPoint::Circle(q)) => s.distance(p, q),
            (Self::Tower(s), AnyPoint::Tower(p), AnyPoint::Tower(q)) => s.distance(p, q),
            (Self::Shift(s), AnyPoint::Symbolic(p), AnyPoint::Symbolic(q)) => s.distance(p, q),
            (Self::Finite(s), AnyPoint::Finite(p), AnyPoint::Finite(q)) => s.distance(p, q),
            (Self::Product(s), AnyPoint::Pair(p), AnyPoint::Pair(q)) => s.distance(p, q),
            (s, p, _) => mismatch(s, p),
        }
    }

    fn forward(&self, x: &AnyPoint) -> AnyPoint {
        let r: Option<AnyPoint> = dispatch_unary!(self, x, forward_opt);
        r.unwrap()
    }

    fn inverse(&self, x: &AnyPoint) -> Option<AnyPoint> {
        dispatch_unary!(self, x, inverse)
    }

    fn iterate(&self, x: &AnyPoint, k: i64) -> Option<AnyPoint> {
        dispatch_unary!(self, x, iterate, k)
    }

    fn cheap_iterate(&self) -> bool {
        match self {
            Self::Rotation(s) => s.cheap_iterate(),
            Self::Tower(s) => s.cheap_iterate(),
            Self::Shift(s) => s.cheap_iterate(),
            Self::Finite(s) => s.cheap_iterate(),
            Self::Product(s) => s.cheap_iterate(),
        }
    }

    fn sample(&self, res: &Resolution) -> Result<Vec<AnyPoint>> {
        Ok(match self {
            Self::Rotation(s) => s.sample(res)?.into_iter().map(AnyPoint::Circle).collect(),
            Self::Tower(s) => s.sample(res)?.into_iter().map(AnyPoint::Tower).collect(),
            Self::Shift(s) => s.sample(res)?.into_iter().map(AnyPoint::Symbolic).collect(),
            Self::Finite(s) => s.sample(res)?.into_iter().map(AnyPoint::Finite).collect(),
            Self::Product(s) => s
                .sample(res)?
                .into_iter()
                .map(|p| AnyPoint::Pair(Box::new(p)))
                .collect(),
        })
    }

    fn bowen_capped(&self, x: &AnyPoint, y: &AnyPoint, n: u64, cap: f64) -> Option<f64> {
        match (self, x, y) {
            (Self::Rotation(s), AnyPoint::Circle(p), AnyPoint::Circle(q)) => {
                s.bowen_capped(p, q, n, cap)
            }
            (Self::Tower(s), AnyPoint::Tower(p), AnyPoint::Tower(q)) => {
                s.bowen_capped(p, q, n, cap)
            }
            (Self::Shift(s), AnyPoint::Symbolic(p), AnyPoint::Symbolic(q)) => {
                s.bowen_capped(p, q, n, cap)
            }
            (Self::Finite(s), AnyPoint::Finite(p), AnyPoint::Finite(q)) => {
                s.bowen_capped(p, q, n, cap)
            }
            (Self::Product(s), AnyPoint::Pair(p), AnyPoint::Pair(q)) => {
                s.bowen_capped(p, q, n, cap)
            }
            (s, p, _) => mismatch(s, p),
        }
    }

    fn label(&self) -> String {
        match self {
            Self::Rotation(s) => s.label(),
            Self::Tower(s) => s.label(),
            Self::Shift(s) => s.label(),
            Self::Finite(s) => s.label(),
            Self::Product(s) => s.label(),
        }
    }
}

/// `forward` with the `Option` shape of `inverse`, so one dispatch macro
/// serves both.
trait ForwardOpt: DynamicalSystem {
    fn forward_opt(&self, x: &Self::Point) -> Option<Self::Point> {
        Some(self.forward(x))
    }
}

impl<S: DynamicalSystem> ForwardOpt for S {}
