//! Pairwise method contrasts: risk difference, relative risk, odds ratio, Fisher p.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use motorscene_core::stats::{
    effect_sizes, haldane_rr_or, sign_test, two_prop_ztest, ContingencySummary, SignTest,
};
use motorscene_gateway::StrategyName;
use serde::{Deserialize, Serialize};

use crate::aggregate::{rows_for_k, Endpoint, MethodAggregate};
use crate::record::RunRecord;
use crate::BenchError;

/// One contrast row. `rr_haldane`/`or_haldane` add 0.5 to every cell, the
/// convention of the published pairwise matrices; `relative_risk` is uncorrected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseRow {
    pub suite: String,
    pub endpoint: Endpoint,
    pub k: u32,
    pub method_a: StrategyName,
    pub method_b: StrategyName,
    pub successes_a: u64,
    pub n_a: u64,
    pub successes_b: u64,
    pub n_b: u64,
    pub rate_a: f64,
    pub rate_b: f64,
    pub risk_diff_pp: f64,
    pub risk_diff_lo_pp: f64,
    pub risk_diff_hi_pp: f64,
    pub relative_risk: Option<f64>,
    pub relative_risk_lo: Option<f64>,
    pub relative_risk_hi: Option<f64>,
    pub rr_haldane: f64,
    pub or_haldane: f64,
    pub fisher_p: f64,
    pub z_test_p: Option<f64>,
}

impl PairwiseRow {
    pub fn from_counts(
        suite: &str,
        endpoint: Endpoint,
        k: u32,
        (method_a, successes_a, n_a): (StrategyName, u64, u64),
        (method_b, successes_b, n_b): (StrategyName, u64, u64),
    ) -> Result<Self, BenchError> {
        let table = ContingencySummary::new(successes_a, n_a, successes_b, n_b)
            .map_err(|e| BenchError::Config(e.to_string()))?;
        let fx = effect_sizes(&table);
        let (rr_h, or_h) = haldane_rr_or(&table);
        Ok(PairwiseRow {
            suite: suite.to_string(),
            endpoint,
            k,
            method_a,
            method_b,
            successes_a,
            n_a,
            successes_b,
            n_b,
            rate_a: table.rate_a(),
            rate_b: table.rate_b(),
            risk_diff_pp: fx.risk_diff_pp.estimate,
            risk_diff_lo_pp: fx.risk_diff_pp.lo,
            risk_diff_hi_pp: fx.risk_diff_pp.hi,
            relative_risk: fx.relative_risk.map(|i| i.estimate),
            relative_risk_lo: fx.relative_risk.map(|i| i.lo),
            relative_risk_hi: fx.relative_risk.map(|i| i.hi),
            rr_haldane: rr_h,
            or_haldane: or_h,
            fisher_p: fx.p_fisher,
            z_test_p: two_prop_ztest(&table).ok().map(|z| z.p_two_sided),
        })
    }
}

/// All unordered pairs in method order: (m0,m1), (m0,m2), ..., (m1,m2), ...
pub fn all_pairs(methods: &[StrategyName]) -> Vec<(StrategyName, StrategyName)> {
    let mut pairs = Vec::new();
    for (i, &a) in methods.iter().enumerate() {
        for &b in &methods[i + 1..] {
            pairs.push((a, b));
        }
    }
    pairs
}

/// One row per contrast per (endpoint, k) group present in `aggregates`.
pub fn pairwise_report(
    aggregates: &[MethodAggregate],
    contrasts: &[(StrategyName, StrategyName)],
) -> Result<Vec<PairwiseRow>, BenchError> {
    let mut groups: IndexMap<(Endpoint, u32), Vec<&MethodAggregate>> = IndexMap::new();
    for a in aggregates {
        groups.entry((a.endpoint, a.k)).or_default().push(a);
    }
    let methods: Vec<StrategyName> = {
        let mut seen = Vec::new();
        for a in aggregates {
            if !seen.contains(&a.method) {
                seen.push(a.method);
            }
        }
        seen
    };
    if methods.len() < 2 {
        return Err(BenchError::Config("a pairwise report needs at least two methods".into()));
    }
    let contrasts = if contrasts.is_empty() { all_pairs(&methods) } else { contrasts.to_vec() };
    for (a, b) in &contrasts {
        for m in [a, b] {
            if !methods.contains(m) {
                return Err(BenchError::UnknownMethod(m.to_string()));
            }
        }
    }

    let mut rows = Vec::new();
    for ((endpoint, k), aggs) in groups {
        let find = |m: StrategyName| aggs.iter().find(|a| a.method == m);
        for &(a, b) in &contrasts {
            let (Some(ra), Some(rb)) = (find(a), find(b)) else {
                continue;
            };
            rows.push(PairwiseRow::from_counts(
                &ra.suite,
                endpoint,
                k,
                (a, ra.successes, ra.n),
                (b, rb.successes, rb.n),
            )?);
        }
    }
    Ok(rows)
}

/// Parses "simple_cga:compact_se3,shenlong:euclidean".
pub fn parse_contrasts(spec: &str) -> Result<Vec<(StrategyName, StrategyName)>, BenchError> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (a, b) = pair
                .split_once(':')
                .or_else(|| pair.split_once("-vs-"))
                .ok_or_else(|| BenchError::Config(format!("contrast '{pair}' must look like a:b")))?;
            let a = a.parse().map_err(|_| BenchError::UnknownMethod(a.trim().to_string()))?;
            let b = b.parse().map_err(|_| BenchError::UnknownMethod(b.trim().to_string()))?;
            Ok((a, b))
        })
        .collect()
}

/// Template-clustered sensitivity check: per-task success rates of two methods
/// compared with a sign test, ties dropped.
pub fn clustered_sign_test(
    records: &[RunRecord],
    endpoint: Endpoint,
    k: u32,
    method_a: StrategyName,
    method_b: StrategyName,
) -> Result<SignTest, BenchError> {
    let rows = rows_for_k(records, k);
    let mut per_task: BTreeMap<&str, [(u64, u64); 2]> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.applies(endpoint)) {
        let slot = if r.method == method_a {
            0
        } else if r.method == method_b {
            1
        } else {
            continue;
        };
        let cell = &mut per_task.entry(r.task_id.as_str()).or_default()[slot];
        cell.0 += r.success_at(endpoint, k) as u64;
        cell.1 += 1;
    }
    if per_task.is_empty() {
        return Err(BenchError::EmptyRecords);
    }
    let (mut wins, mut losses, mut ties) = (0, 0, 0);
    for [(sa, na), (sb, nb)] in per_task.values().copied() {
        if na == 0 || nb == 0 {
            continue;
        }
        // compare sa/na with sb/nb without floating point
        match (sa * nb).cmp(&(sb * na)) {
            std::cmp::Ordering::Greater => wins += 1,
            std::cmp::Ordering::Less => losses += 1,
            std::cmp::Ordering::Equal => ties += 1,
        }
    }
    Ok(sign_test(wins, losses, ties))
}
