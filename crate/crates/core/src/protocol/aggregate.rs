//! Weighted partial aggregation per slave model and unweighted cloud
//! aggregation across stations.

use super::Upload;
use crate::error::{Error, Result};
use crate::nn::{ModelSpec, ModelWeights};

/// Data-size weighted mean of the accepted uploads of one slave group:
/// weights are |D_u| normalized by the group sum (equal weights when
/// every batch is empty). All uploads must match the slave's parameter
/// count.
pub fn partial_aggregate(uploads: &[&Upload], spec: &ModelSpec) -> Result<ModelWeights> {
    if uploads.is_empty() {
        return Err(Error::Protocol("partial aggregation over an empty group".into()));
    }
    let expected = spec.param_count();
    for up in uploads {
        if up.declared.param_count() != expected {
            return Err(Error::StructuralMismatch(format!(
                "upload from device {} has {} params, slave {} expects {}",
                up.device_id,
                up.declared.param_count(),
                spec.model_id,
                expected
            )));
        }
    }
    let total: f64 = uploads.iter().map(|u| u.batch_size as f64).sum();
    let weight_of = |u: &Upload| {
        if total > 0.0 {
            u.batch_size as f64 / total
        } else {
            1.0 / uploads.len() as f64
        }
    };
    let mut params = vec![0.0; expected];
    for up in uploads {
        let w = weight_of(up);
        for (acc, p) in params.iter_mut().zip(&up.declared.params) {
            *acc += w * p;
        }
    }
    Ok(ModelWeights { spec: spec.clone(), params })
}

/// Unweighted elementwise mean of the station masters.
pub fn cloud_aggregate(masters: &[ModelWeights]) -> Result<ModelWeights> {
    let first = masters
        .first()
        .ok_or_else(|| Error::Protocol("cloud aggregation over no masters".into()))?;
    for m in masters.iter().skip(1) {
        if !m.spec.structurally_eq(&first.spec) {
            return Err(Error::StructuralMismatch(format!(
                "master {} does not match {}",
                m.spec.model_id, first.spec.model_id
            )));
        }
    }
    let scale = 1.0 / masters.len() as f64;
    let mut params = vec![0.0; first.param_count()];
    for m in masters {
        for (acc, p) in params.iter_mut().zip(&m.params) {
            *acc += p;
        }
    }
    params.iter_mut().for_each(|p| *p *= scale);
    Ok(ModelWeights { spec: first.spec.clone(), params })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::init_model;
    use crate::rng::stream;

    fn scalar_spec() -> ModelSpec {
        ModelSpec::dense("s", 1, 0, 1)
    }

    fn scalar_upload(device: usize, v: f64, batch: usize) -> Upload {
        let mut w = ModelWeights::zeros(&scalar_spec());
        w.params = vec![v, v];
        Upload { device_id: device, declared: w, batch_size: batch }
    }

    #[test]
    fn equal_sizes_give_plain_mean() {
        let a = scalar_upload(0, 1.0, 5);
        let b = scalar_upload(1, 3.0, 5);
        let agg = partial_aggregate(&[&a, &b], &scalar_spec()).unwrap();
        assert!((agg.params[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn normalized_weighted_mean() {
        // sizes 1 and 3, values 0 and 4: 0.25*0 + 0.75*4 = 3
        let a = scalar_upload(0, 0.0, 1);
        let b = scalar_upload(1, 4.0, 3);
        let agg = partial_aggregate(&[&a, &b], &scalar_spec()).unwrap();
        assert!((agg.params[0] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_upload_passes_through() {
        let a = scalar_upload(0, 7.5, 9);
        let agg = partial_aggregate(&[&a], &scalar_spec()).unwrap();
        assert_eq!(agg.params, a.declared.params);
    }

    #[test]
    fn zero_total_batch_falls_back_to_equal_weights() {
        let a = scalar_upload(0, 2.0, 0);
        let b = scalar_upload(1, 4.0, 0);
        let agg = partial_aggregate(&[&a, &b], &scalar_spec()).unwrap();
        assert!((agg.params[0] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn aggregate_stays_in_convex_envelope() {
        let spec = ModelSpec::gru("g", 3, 3);
        let mut rng = stream(41, "agg");
        let uploads: Vec<Upload> = (0..4)
            .map(|d| Upload {
                device_id: d,
                declared: init_model(&spec, &mut rng).unwrap(),
                batch_size: d + 1,
            })
            .collect();
        let refs: Vec<&Upload> = uploads.iter().collect();
        let agg = partial_aggregate(&refs, &spec).unwrap();
        for i in 0..agg.params.len() {
            let lo = uploads.iter().map(|u| u.declared.params[i]).fold(f64::INFINITY, f64::min);
            let hi = uploads.iter().map(|u| u.declared.params[i]).fold(f64::NEG_INFINITY, f64::max);
            assert!(agg.params[i] >= lo - 1e-12 && agg.params[i] <= hi + 1e-12);
        }
    }

    #[test]
    fn cloud_mean_and_idempotence() {
        let spec = ModelSpec::dense("m", 1, 0, 1);
        let mut a = ModelWeights::zeros(&spec);
        a.params = vec![1.0, 0.0];
        let mut b = ModelWeights::zeros(&spec);
        b.params = vec![3.0, 0.0];
        let mean = cloud_aggregate(&[a.clone(), b]).unwrap();
        assert!((mean.params[0] - 2.0).abs() < 1e-15);

        let same = cloud_aggregate(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(same.params, a.params);
    }

    #[test]
    fn cloud_matches_elementwise_oracle() {
        let spec = ModelSpec::gru("g", 4, 4);
        let mut rng = stream(42, "agg");
        let masters: Vec<ModelWeights> =
            (0..2).map(|_| init_model(&spec, &mut rng).unwrap()).collect();
        let agg = cloud_aggregate(&masters).unwrap();
        for i in 0..agg.params.len() {
            let oracle = (masters[0].params[i] + masters[1].params[i]) / 2.0;
            assert!((agg.params[i] - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn cloud_rejects_structural_mismatch() {
        let a = ModelWeights::zeros(&ModelSpec::gru("a", 3, 3));
        let b = ModelWeights::zeros(&ModelSpec::gru("b", 3, 4));
        assert!(matches!(cloud_aggregate(&[a, b]), Err(Error::StructuralMismatch(_))));
    }

    #[test]
    fn group_weights_sum_to_one() {
        let ups: Vec<Upload> = (0..5).map(|d| scalar_upload(d, 1.0, 2 * d + 1)).collect();
        let refs: Vec<&Upload> = ups.iter().collect();
        // all values 1.0, so any properly normalized weighting returns 1.0
        let agg = partial_aggregate(&refs, &scalar_spec()).unwrap();
        assert!((agg.params[0] - 1.0).abs() < 1e-12);
    }
}
