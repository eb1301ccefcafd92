//! `verify`: recomputes a 1% sample of records from scratch and from their archives.

use jchaos_core::solvers::SampleSet;

use crate::config::ExperimentConfig;
use crate::error::{HResult, HarnessError};
use crate::pipeline::{adjudicate, execute, parallel_for_each, sampled_instance, Workspace};
use crate::store::{gunzip_file, sha256_hex, RunRecord};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifySummary {
    pub records: usize,
    pub checked: Vec<String>,
}

/// Every hundredth record in id order, and at least one.
pub fn sample_ids(records: &[RunRecord]) -> Vec<usize> {
    let n = records.len();
    let k = n.div_ceil(100).max(1).min(n);
    (0..k).map(|i| i * n / k).collect()
}

fn check(ws: &Workspace, r: &RunRecord) -> HResult<()> {
    let id = r.key.id();
    let fail = |msg: String| HarnessError::Validation(format!("{id}: {msg}"));
    let inputs = ws.inputs(&r.key)?;
    let text = gunzip_file(&ws.rd.root.join(&r.archive))?;
    if sha256_hex(&text) != r.content_hash {
        return Err(fail("archive hash differs from the record".into()));
    }
    let stored = SampleSet::from_archive_text(&text)?;
    let sampled = sampled_instance(&r.key, &inputs)?;
    stored
        .verify_energies(&sampled, 1e-9)
        .map_err(|e| fail(format!("stored energies: {e}")))?;
    let (successes, disagreements) = adjudicate(&r.key, &inputs, &stored)?;
    if (successes, disagreements) != (r.successes, r.disagreements) {
        return Err(fail(format!(
            "archive gives {successes} successes, record says {}",
            r.successes
        )));
    }
    let fresh = execute(&r.key, &inputs)?;
    if fresh.archive_text != text {
        return Err(fail("re-sampling does not reproduce the archive".into()));
    }
    Ok(())
}

pub fn cmd_verify(cfg: &ExperimentConfig, threads: usize) -> HResult<VerifySummary> {
    let ws = Workspace::load(cfg)?;
    let records: Vec<RunRecord> = ws.rd.completed()?.into_values().collect();
    if records.is_empty() {
        return Err(HarnessError::Validation("run directory has no completed records".into()));
    }
    let picks: Vec<&RunRecord> = sample_ids(&records).into_iter().map(|i| &records[i]).collect();
    let mut checked = Vec::new();
    parallel_for_each(&picks, threads, |r| check(&ws, r).map(|_| r.key.id()), |_, id| {
        checked.push(id);
        Ok(())
    })?;
    checked.sort();
    Ok(VerifySummary {
        records: records.len(),
        checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_size_is_one_percent() {
        let dummy = |n: usize| sample_ids(&vec![stub_record(); n]);
        assert_eq!(dummy(1), vec![0]);
        assert_eq!(dummy(99).len(), 1);
        assert_eq!(dummy(250).len(), 3);
        assert_eq!(dummy(1000).len(), 10);
    }

    fn stub_record() -> RunRecord {
        serde_json::from_str(
            r#"{"key":{"instance":0,"l":1,"eta":0.0,"gamma":null,"strategy":"C","gauge":0,"seed":0},
               "status":"complete","archive":"x","successes":0,"reads":1,"disagreements":0,
               "content_hash":"","wall_time_s":0.0}"#,
        )
        .unwrap()
    }
}
