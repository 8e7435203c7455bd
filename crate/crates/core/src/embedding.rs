//! Time-delay reconstruction of phase space from a scalar series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub m: usize,
    pub tau: usize,
}

impl EmbeddingParams {
    pub fn new(m: usize, tau: usize) -> Result<Self> {
        if m == 0 || tau == 0 {
            return Err(Error::InvalidParameter(format!(
                "embedding needs m >= 1 and tau >= 1, got m={m}, tau={tau}"
            )));
        }
        Ok(Self { m, tau })
    }

    /// Time span covered by one delay vector, in samples.
    pub fn window(&self) -> usize {
        (self.m - 1) * self.tau
    }

    /// Number of delay vectors a series of `len` samples yields, if any.
    pub fn point_count(&self, len: usize) -> Option<usize> {
        len.checked_sub(self.window()).filter(|&n| n > 0)
    }
}

/// Delay vectors `(x[i], x[i+tau], ..., x[i+(m-1)tau])`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    data: Vec<f64>,
    params: EmbeddingParams,
    source_length: usize,
}

impl Embedding {
    pub fn params(&self) -> EmbeddingParams {
        self.params
    }

    pub fn dim(&self) -> usize {
        self.params.m
    }

    pub fn source_length(&self) -> usize {
        self.source_length
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.params.m
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let m = self.params.m;
        &self.data[i * m..(i + 1) * m]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.params.m)
    }

    /// Same points in reverse temporal order.
    pub fn reversed(&self) -> Embedding {
        let data = self.points().rev().flatten().copied().collect();
        Embedding {
            data,
            params: self.params,
            source_length: self.source_length,
        }
    }

    /// First index of a component outside [0, 1], if any.
    pub(crate) fn first_out_of_unit_cube(&self) -> Option<usize> {
        self.points()
            .position(|p| p.iter().any(|&c| !(0.0..=1.0).contains(&c)))
    }
}

pub fn delay_embed(series: &TimeSeries, params: EmbeddingParams) -> Result<Embedding> {
    embed_values(series.values(), params)
}

pub fn embed_values(values: &[f64], params: EmbeddingParams) -> Result<Embedding> {
    EmbeddingParams::new(params.m, params.tau)?;
    let n = params
        .point_count(values.len())
        .ok_or(Error::SeriesTooShort {
            len: values.len(),
            m: params.m,
            tau: params.tau,
        })?;
    let mut data = Vec::with_capacity(n * params.m);
    for i in 0..n {
        data.extend((0..params.m).map(|j| values[i + j * params.tau]));
    }
    Ok(Embedding {
        data,
        params,
        source_length: values.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ts(v: Vec<f64>) -> TimeSeries {
        TimeSeries::new(v, "t").unwrap()
    }

    #[test]
    fn pairs_for_m2_tau1() {
        let e = delay_embed(&ts(vec![1., 2., 3., 4., 5.]), EmbeddingParams::new(2, 1).unwrap()).unwrap();
        let pts: Vec<_> = e.points().map(|p| p.to_vec()).collect();
        assert_eq!(pts, vec![vec![1., 2.], vec![2., 3.], vec![3., 4.], vec![4., 5.]]);
    }

    #[test]
    fn m1_is_identity() {
        let v = vec![0.3, 0.1, 0.7, 0.2];
        let e = delay_embed(&ts(v.clone()), EmbeddingParams::new(1, 7).unwrap()).unwrap();
        assert_eq!(e.points().map(|p| p[0]).collect::<Vec<_>>(), v);
    }

    #[test]
    fn count_at_desk_scale() {
        // 8825 - 2 * 43
        let p = EmbeddingParams::new(3, 43).unwrap();
        assert_eq!(p.point_count(8825), Some(8739));
        let e = embed_values(&vec![0.5; 8825], p).unwrap();
        assert_eq!(e.len(), 8739);
    }

    #[test]
    fn too_short() {
        let err = delay_embed(&ts(vec![1., 2., 3.]), EmbeddingParams::new(3, 1).unwrap());
        assert!(err.is_ok());
        let err = delay_embed(&ts(vec![1., 2., 3.]), EmbeddingParams::new(3, 2).unwrap());
        assert!(matches!(err, Err(Error::SeriesTooShort { len: 3, m: 3, tau: 2 })));
    }

    #[test]
    fn zero_params_rejected() {
        assert!(EmbeddingParams::new(0, 1).is_err());
        assert!(EmbeddingParams::new(2, 0).is_err());
    }

    proptest! {
        #[test]
        fn layout_and_count(len in 2usize..300, m in 1usize..8, tau in 1usize..20) {
            let v: Vec<f64> = (0..len).map(|i| (i as f64 * 0.37).sin()).collect();
            let p = EmbeddingParams { m, tau };
            match embed_values(&v, p) {
                Ok(e) => {
                    // brute-force count of valid start indices
                    let expected = (0..len).filter(|i| i + (m - 1) * tau < len).count();
                    prop_assert_eq!(e.len(), expected);
                    for (i, pt) in e.points().enumerate() {
                        for (j, &c) in pt.iter().enumerate() {
                            prop_assert_eq!(c, v[i + j * tau]);
                        }
                    }
                    let first: Vec<f64> = e.points().map(|p| p[0]).collect();
                    prop_assert_eq!(&first[..], &v[..expected]);
                }
                Err(_) => prop_assert!((m - 1) * tau >= len),
            }
        }
    }
}
