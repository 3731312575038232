use super::{DynamicalSystem, Resolution};
use crate::Result;

/// `f × g` acting coordinatewise, with the max metric.
#[derive(Clone, Debug)]
pub struct Product<A, B> {
    pub first: A,
    pub second: B,
}

pub fn product_system<A: DynamicalSystem, B: DynamicalSystem>(a: A, b: B) -> Product<A, B> {
    Product {
        first: a,
        second: b,
    }
}

impl<A: DynamicalSystem, B: DynamicalSystem> DynamicalSystem for Product<A, B> {
    type Point = (A::Point, B::Point);

    fn distance(&self, x: &Self::Point, y: &Self::Point) -> f64 {
        self.first
            .distance(&x.0, &y.0)
            .max(self.second.distance(&x.1, &y.1))
    }

    fn forward(&self, x: &Self::Point) -> Self::Point {
        (self.first.forward(&x.0), self.second.forward(&x.1))
    }

    fn inverse(&self, x: &Self::Point) -> Option<Self::Point> {
        Some((self.first.inverse(&x.0)?, self.second.inverse(&x.1)?))
    }

    fn iterate(&self, x: &Self::Point, k: i64) -> Option<Self::Point> {
        Some((self.first.iterate(&x.0, k)?, self.second.iterate(&x.1, k)?))
    }

    fn cheap_iterate(&self) -> bool {
        self.first.cheap_iterate() && self.second.cheap_iterate()
    }

    /// Cartesian product of the factor samples, first coordinate major.
    fn sample(&self, res: &Resolution) -> Result<Vec<Self::Point>> {
        let a = self.first.sample(res)?;
        let b = self.second.sample(res)?;
        Ok(a.iter()
            .flat_map(|p| b.iter().map(move |q| (p.clone(), q.clone())))
            .collect())
    }

    // max_k max(d_a, d_b) = max(max_k d_a, max_k d_b)
    fn bowen_capped(&self, x: &Self::Point, y: &Self::Point, n: u64, cap: f64) -> Option<f64> {
        let a = self.first.bowen_capped(&x.0, &y.0, n, cap)?;
        let b = self.second.bowen_capped(&x.1, &y.1, n, cap)?;
        Some(a.max(b))
    }

    fn label(&self) -> String {
        format!("product:{},{}", self.first.label(), self.second.label())
    }
}
