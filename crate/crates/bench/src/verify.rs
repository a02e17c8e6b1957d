use ivote_core::datagen::{Items, ProblemInstance};
use ivote_core::surfaces::reprojection::angular_error;
use ivote_core::surfaces::{PoseHypothesis, Correspondence};

use crate::report::{aggregate, RunRecord, RunReport};
use crate::BenchError;

/// Inlier ids of `record` whose angular reprojection error under the
/// reported pose is at most `threshold_rad`. Points behind the camera fail.
pub fn verified_ids(
    record: &RunRecord,
    items: &[Correspondence<f64>],
    threshold_rad: f64,
) -> Result<Vec<u32>, BenchError> {
    let pose = PoseHypothesis::from_point(record.model, &record.params)?;
    Ok(record
        .inlier_ids
        .iter()
        .copied()
        .filter(|&id| {
            let Some(c) = items.get(id as usize) else { return false };
            matches!(angular_error(record.model, &pose, c), Ok(e) if e <= threshold_rad)
        })
        .collect())
}

/// Filters every run's inliers by angular reprojection error and updates
/// the counts.
pub fn verify_inliers(
    report: &RunReport,
    instance: &ProblemInstance<f64>,
    threshold_rad: f64,
) -> Result<RunReport, BenchError> {
    if !report.model.is_pose() {
        return Err(BenchError::Usage(format!("{} is not a pose model", report.model)));
    }
    if instance.model_tag != report.model {
        return Err(BenchError::Usage(format!(
            "report is for {}, instance for {}",
            report.model, instance.model_tag
        )));
    }
    if !(threshold_rad >= 0.0) {
        return Err(BenchError::Usage(format!("threshold {threshold_rad} must be non-negative")));
    }
    let Items::Correspondences(items) = &instance.items else {
        return Err(BenchError::Usage("instance holds no correspondences".into()));
    };
    let runs = report
        .runs
        .iter()
        .map(|r| {
            let ids = verified_ids(r, items, threshold_rad)?;
            Ok(RunRecord {
                count: ids.len(),
                inlier_ids: ids,
                ..r.clone()
            })
        })
        .collect::<Result<Vec<_>, BenchError>>()?;
    Ok(RunReport {
        model: report.model,
        aggregates: aggregate(&runs),
        runs,
    })
}
