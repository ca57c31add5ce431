use std::io::Write;

use serde::{Deserialize, Serialize};

/// A function sampled on a uniform angular grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub mesh_size: f64,
}

impl RadialProfile {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(nodes.len(), values.len());
        let mesh_size = if nodes.len() > 1 { nodes[1] - nodes[0] } else { 0.0 };
        Self {
            nodes,
            values,
            mesh_size,
        }
    }

    /// Samples `f` at `n + 1` equispaced nodes on `[a, b]`.
    pub fn sample(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let h = (b - a) / n as f64;
        let nodes: Vec<f64> = (0..=n).map(|i| a + i as f64 * h).collect();
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self {
            nodes,
            values,
            mesh_size: h,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lower(&self) -> f64 {
        self.nodes[0]
    }

    pub fn upper(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            nodes: self.nodes.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
            mesh_size: self.mesh_size,
        }
    }

    /// Four-point Lagrange interpolation; zero outside `[lower, upper]`.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        let (a, b) = (self.lower(), self.upper());
        if x < a - 1e-14 * (b - a).abs() || x > b + 1e-14 * (b - a).abs() || n == 0 {
            return 0.0;
        }
        if n < 4 {
            // linear fallback
            let h = self.mesh_size;
            let i = (((x - a) / h).floor() as usize).min(n - 2);
            let t = (x - self.nodes[i]) / h;
            return self.values[i] * (1.0 - t) + self.values[i + 1] * t;
        }
        let h = self.mesh_size;
        let s = (x - a) / h;
        let i = (s.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let mut acc = 0.0;
        for j in 0..4 {
            let mut l = 1.0;
            for m in 0..4 {
                if m != j {
                    l *= (s - (i + m) as f64) / (j as f64 - m as f64);
                }
            }
            acc += l * self.values[i + j];
        }
        acc
    }

    pub fn write_csv<W: Write>(&self, mut w: W, header: (&str, &str)) -> std::io::Result<()> {
        writeln!(w, "{},{}", header.0, header.1)?;
        for (x, v) in self.nodes.iter().zip(&self.values) {
            writeln!(w, "{x:.17e},{v:.17e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_interpolation_is_fourth_order() {
        let err = |n: usize| {
            let p = RadialProfile::sample(0.0, 1.0, n, |x| (3.0 * x).sin());
            let mut e: f64 = 0.0;
            for i in 0..n {
                let x = (i as f64 + 0.5) / n as f64;
                e = e.max((p.interpolate(x) - (3.0 * x).sin()).abs());
            }
            e
        };
        let order = (err(32) / err(64)).log2();
        assert!(order > 3.7, "order {order}");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let p = RadialProfile::sample(0.0, 1.0, 2, |x| x);
        let mut buf = Vec::new();
        p.write_csv(&mut buf, ("theta", "value")).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 4);
        assert!(s.starts_with("theta,value\n"));
    }
}
