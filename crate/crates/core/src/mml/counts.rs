use crate::sample::{EvalGrid, TwoSampleData};
use crate::scalar::Scalar;

/// Per-grid-point counts of positives at or below / above each `t_h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCounts<T> {
    pub m1: Vec<T>,
    pub m2: Vec<T>,
    pub n1: Vec<T>,
    pub n2: Vec<T>,
    pub m0: usize,
    pub m_plus: usize,
    pub n0: usize,
    pub n_plus: usize,
}

impl<T: Scalar> GridCounts<T> {
    pub fn new(data: &TwoSampleData<T>, grid: &EvalGrid<T>) -> Self {
        let (m_plus, n_plus) = (data.m_plus(), data.n_plus());
        let mut counts = Self {
            m1: Vec::with_capacity(grid.k()),
            m2: Vec::with_capacity(grid.k()),
            n1: Vec::with_capacity(grid.k()),
            n2: Vec::with_capacity(grid.k()),
            m0: data.m0(),
            m_plus,
            n0: data.n0(),
            n_plus,
        };
        for &t in grid.points() {
            let mx = data.x().count_le(t);
            let ny = data.y().count_le(t);
            counts.m1.push(T::of_count(mx));
            counts.m2.push(T::of_count(m_plus - mx));
            counts.n1.push(T::of_count(ny));
            counts.n2.push(T::of_count(n_plus - ny));
        }
        counts
    }

    pub fn m(&self) -> usize {
        self.m0 + self.m_plus
    }

    pub fn n(&self) -> usize {
        self.n0 + self.n_plus
    }

    pub fn len(&self) -> usize {
        self.m1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m1.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_partition_positives() {
        let d = TwoSampleData::from_values(&[0.0, 1.0, 3.0, 3.0], &[0.0, 2.0, 3.0, 4.0, 0.0]).unwrap();
        let g = EvalGrid::build(&d, 0.001).unwrap();
        let c = GridCounts::new(&d, &g);
        assert_eq!(g.points(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(c.m1, vec![1.0, 1.0, 3.0, 3.0]);
        assert_eq!(c.n1, vec![0.0, 1.0, 2.0, 3.0]);
        for h in 0..c.len() {
            assert_eq!(c.m1[h] + c.m2[h], 3.0);
            assert_eq!(c.n1[h] + c.n2[h], 3.0);
        }
        assert_eq!((c.m0, c.n0, c.m(), c.n()), (1, 2, 4, 5));
    }
}
