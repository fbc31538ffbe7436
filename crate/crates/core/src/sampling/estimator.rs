/// Streaming ratio estimator `Σx / Σy` with single-pass co-moments.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EstimatorState {
    pub n_total: u64,
    pub n_consistent: u64,
    pub numerator: f64,
    pub denominator: f64,
    mean_x: f64,
    mean_y: f64,
    m2_x: f64,
    m2_y: f64,
    c_xy: f64,
}

impl EstimatorState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one sample contributing `x` to the numerator and `y` to the
    /// denominator.
    pub fn push(&mut self, x: f64, y: f64, consistent: bool) {
        self.n_total += 1;
        self.n_consistent += u64::from(consistent);
        self.numerator += x;
        self.denominator += y;
        let n = self.n_total as f64;
        let dx = x - self.mean_x;
        let dy = y - self.mean_y;
        self.mean_x += dx / n;
        self.mean_y += dy / n;
        self.m2_x += dx * (x - self.mean_x);
        self.m2_y += dy * (y - self.mean_y);
        self.c_xy += dx * (y - self.mean_y);
    }

    pub fn estimate(&self) -> Option<f64> {
        (self.denominator > 0.0).then(|| self.numerator / self.denominator)
    }

    /// Estimated variance of [`estimate`](Self::estimate), by the delta
    /// method for ratios.
    pub fn variance(&self) -> Option<f64> {
        let r = self.estimate()?;
        if self.n_total < 2 {
            return None;
        }
        let n = self.n_total as f64;
        let s = (self.m2_x - 2.0 * r * self.c_xy + r * r * self.m2_y) / (n - 1.0);
        Some((s / (n * self.mean_y * self.mean_y)).max(0.0))
    }

    pub fn std_error(&self) -> Option<f64> {
        self.variance().map(f64::sqrt)
    }

    /// Combines two independent runs.
    pub fn merge(&self, other: &Self) -> Self {
        if self.n_total == 0 {
            return other.clone();
        }
        if other.n_total == 0 {
            return self.clone();
        }
        let (na, nb) = (self.n_total as f64, other.n_total as f64);
        let n = na + nb;
        let dx = other.mean_x - self.mean_x;
        let dy = other.mean_y - self.mean_y;
        EstimatorState {
            n_total: self.n_total + other.n_total,
            n_consistent: self.n_consistent + other.n_consistent,
            numerator: self.numerator + other.numerator,
            denominator: self.denominator + other.denominator,
            mean_x: self.mean_x + dx * nb / n,
            mean_y: self.mean_y + dy * nb / n,
            m2_x: self.m2_x + other.m2_x + dx * dx * na * nb / n,
            m2_y: self.m2_y + other.m2_y + dy * dy * na * nb / n,
            c_xy: self.c_xy + other.c_xy + dx * dy * na * nb / n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_variance() {
        let mut s = EstimatorState::new();
        for x in [1.0, 0.0, 1.0, 1.0] {
            s.push(x, 1.0, x > 0.0);
        }
        assert_eq!(s.estimate(), Some(0.75));
        assert_eq!(s.n_consistent, 3);
        let v = s.variance().unwrap();
        assert!((v - 0.25 / 4.0).abs() < 1e-12, "{v}");
        assert_eq!(EstimatorState::new().estimate(), None);
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<(f64, f64)> = (0..50).map(|i| ((i % 7) as f64 * 0.1, (i % 3 != 0) as u8 as f64)).collect();
        let mut all = EstimatorState::new();
        let (mut a, mut b) = (EstimatorState::new(), EstimatorState::new());
        for (i, &(x, y)) in xs.iter().enumerate() {
            all.push(x, y, y > 0.0);
            if i < 20 { a.push(x, y, y > 0.0) } else { b.push(x, y, y > 0.0) }
        }
        let m = a.merge(&b);
        assert_eq!((m.n_total, m.n_consistent), (all.n_total, all.n_consistent));
        assert!((m.variance().unwrap() - all.variance().unwrap()).abs() < 1e-12);
        assert!((m.estimate().unwrap() - all.estimate().unwrap()).abs() < 1e-12);
    }
}
