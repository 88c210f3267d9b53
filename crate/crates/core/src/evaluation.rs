//! Ranking metrics and report aggregation.
//!
//! ROC-AUC is computed in the Mann–Whitney form (probability that a random
//! positive outranks a random negative, ties at half credit), so a
//! constant score series over mixed labels evaluates to exactly 0.5.
//! Average Precision sums recall increments times precision over
//! descending unique score thresholds. Clients are bucketed by their
//! full-timeline fraud proportion into four imbalance groups; per-group
//! summaries and the relative mean-AP table against the naive baseline
//! form the final report.

use crate::prediction::{ModelName, ScoreSeries};
use crate::timeline::EventTimeline;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;

/// Imbalance buckets by full-timeline fraud proportion. Clients with no
/// fraud at all or more than 20% fraud are excluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ImbalanceGroup {
    /// P ≤ 1%
    G1,
    /// 1% < P ≤ 5%
    G2,
    /// 5% < P ≤ 10%
    G3,
    /// 10% < P ≤ 20%
    G4,
}

impl ImbalanceGroup {
    pub const ALL: [ImbalanceGroup; 4] = [
        ImbalanceGroup::G1,
        ImbalanceGroup::G2,
        ImbalanceGroup::G3,
        ImbalanceGroup::G4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ImbalanceGroup::G1 => "G1",
            ImbalanceGroup::G2 => "G2",
            ImbalanceGroup::G3 => "G3",
            ImbalanceGroup::G4 => "G4",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ImbalanceGroup::G1 => "P<=1%",
            ImbalanceGroup::G2 => "1%<P<=5%",
            ImbalanceGroup::G3 => "5%<P<=10%",
            ImbalanceGroup::G4 => "10%<P<=20%",
        }
    }
}

impl std::fmt::Display for ImbalanceGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ImbalanceGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "G1" | "g1" => Ok(ImbalanceGroup::G1),
            "G2" | "g2" => Ok(ImbalanceGroup::G2),
            "G3" | "g3" => Ok(ImbalanceGroup::G3),
            "G4" | "g4" => Ok(ImbalanceGroup::G4),
            other => Err(format!("unknown group {other:?}")),
        }
    }
}

/// The bucket for a fraud proportion, if any (boundaries inclusive on the
/// upper side).
pub fn group_for_proportion(p: f64) -> Option<ImbalanceGroup> {
    if p <= 0.0 {
        None
    } else if p <= 0.01 {
        Some(ImbalanceGroup::G1)
    } else if p <= 0.05 {
        Some(ImbalanceGroup::G2)
    } else if p <= 0.10 {
        Some(ImbalanceGroup::G3)
    } else if p <= 0.20 {
        Some(ImbalanceGroup::G4)
    } else {
        None
    }
}

/// Buckets timelines by fraud proportion; returns indices into the input
/// slice. Fraud-free clients and clients above 20% fraud are dropped.
pub fn group_clients(timelines: &[EventTimeline]) -> BTreeMap<ImbalanceGroup, Vec<usize>> {
    let mut groups: BTreeMap<ImbalanceGroup, Vec<usize>> = BTreeMap::new();
    for (i, tl) in timelines.iter().enumerate() {
        if tl.is_empty() {
            continue;
        }
        if let Some(g) = group_for_proportion(tl.fraud_proportion()) {
            groups.entry(g).or_default().push(i);
        }
    }
    groups
}

/// Mann–Whitney ROC-AUC with ties at half credit. `None` when the series
/// has only one class, where the metric is undefined.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Option<f64> {
    assert_eq!(scores.len(), labels.len());
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return None;
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[i].partial_cmp(&scores[j]).expect("finite scores"));

    // Average ranks within tie groups keep the half-credit convention
    // exact: the numerator stays a sum of half-integers.
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j + 1) as f64 / 2.0; // ranks are 1-based
        for &idx in &order[i..j] {
            if labels[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }

    let p = pos as f64;
    let n = neg as f64;
    Some((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// Average Precision over descending unique score thresholds:
/// `Σ_k (R_k − R_{k−1}) · P_k` with ties grouped at one threshold.
/// `None` when the series has no positives.
pub fn average_precision(scores: &[f64], labels: &[u8]) -> Option<f64> {
    assert_eq!(scores.len(), labels.len());
    let total_pos = labels.iter().filter(|&&l| l == 1).count();
    if total_pos == 0 {
        return None;
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).expect("finite scores"));

    let mut ap = 0.0f64;
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let tp_before = tp;
        for &idx in &order[i..j] {
            if labels[idx] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        if tp > tp_before {
            let recall_step = (tp - tp_before) as f64 / total_pos as f64;
            let precision = tp as f64 / (tp + fp) as f64;
            ap += recall_step * precision;
        }
        i = j;
    }
    Some(ap)
}

/// Relative mean-AP variation of a model against the naive baseline:
/// `(MAP_model − MAP_naive) / MAP_naive`.
pub fn relative_map_variation(map_model: f64, map_naive: f64) -> f64 {
    (map_model - map_naive) / map_naive
}

/// Which metric a summary row refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricKind {
    Auc,
    Ap,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Auc => "AUC",
            MetricKind::Ap => "AP",
        }
    }
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One client × one model evaluation row. Metrics are `None` when
/// undefined (single-class test segments).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClientMetrics {
    pub client_id: String,
    pub group: ImbalanceGroup,
    pub model: ModelName,
    pub auc: Option<f64>,
    pub ap: Option<f64>,
    pub zero_convention: bool,
    pub converged: bool,
}

impl ClientMetrics {
    /// Scores a series into a metrics row.
    pub fn from_series(
        group: ImbalanceGroup,
        series: &ScoreSeries,
        zero_convention: bool,
        converged: bool,
    ) -> Self {
        ClientMetrics {
            client_id: series.client_id().to_string(),
            group,
            model: series.model(),
            auc: roc_auc(series.scores(), series.labels()),
            ap: average_precision(series.scores(), series.labels()),
            zero_convention,
            converged,
        }
    }
}

/// Max/mean/min/std of one metric over the defined clients of one
/// (model, group) cell. Std is the population standard deviation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricSummary {
    pub model: ModelName,
    pub group: ImbalanceGroup,
    pub metric: MetricKind,
    pub max: f64,
    pub mean: f64,
    pub min: f64,
    pub std: f64,
    pub n: usize,
}

/// Relative mean-AP of one Poisson model against the baseline in one group.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelativeMapCell {
    pub model: ModelName,
    pub group: ImbalanceGroup,
    pub relative_map: f64,
}

/// Conventions recorded alongside the numbers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub std_convention: String,
    pub single_class_policy: String,
    pub baseline_model: String,
}

impl Default for ReportMetadata {
    fn default() -> Self {
        ReportMetadata {
            std_convention: "population (divide by n)".into(),
            single_class_policy:
                "metrics undefined on single-class test segments; such clients are \
                 excluded from the affected aggregate cells"
                    .into(),
            baseline_model: ModelName::NaiveStatic.to_string(),
        }
    }
}

/// Aggregated evaluation output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub summaries: Vec<MetricSummary>,
    pub relative_map: Vec<RelativeMapCell>,
    pub metadata: ReportMetadata,
    /// Cells skipped for lack of defined values, and similar notes.
    pub diagnostics: Vec<String>,
}

impl EvaluationReport {
    /// Mean of a metric in one cell, if present.
    pub fn mean(&self, model: ModelName, group: ImbalanceGroup, metric: MetricKind) -> Option<f64> {
        self.summaries
            .iter()
            .find(|s| s.model == model && s.group == group && s.metric == metric)
            .map(|s| s.mean)
    }

    pub fn relative_map(&self, model: ModelName, group: ImbalanceGroup) -> Option<f64> {
        self.relative_map
            .iter()
            .find(|c| c.model == model && c.group == group)
            .map(|c| c.relative_map)
    }

    /// One CSV row per summary cell.
    pub fn write_summary_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "model,group,metric,max,mean,min,std,n")?;
        for s in &self.summaries {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                s.model, s.group, s.metric, s.max, s.mean, s.min, s.std, s.n
            )?;
        }
        Ok(())
    }

    pub fn write_relative_map_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "model,group,relative_map")?;
        for c in &self.relative_map {
            writeln!(w, "{},{},{}", c.model, c.group, c.relative_map)?;
        }
        Ok(())
    }

    /// Plot-data rows `(x, y, series) = (group, relative_map, model)`.
    pub fn write_plot_data_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y,series")?;
        for c in &self.relative_map {
            writeln!(w, "{},{},{}", c.group, c.relative_map, c.model)?;
        }
        Ok(())
    }
}

/// Writes per-client rows `client_id,group,model,auc,ap,zero_convention,converged`
/// (empty fields for undefined metrics).
pub fn write_client_metrics_csv<W: Write>(
    rows: &[ClientMetrics],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "client_id,group,model,auc,ap,zero_convention,converged")?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.client_id,
            r.group,
            r.model,
            opt(r.auc),
            opt(r.ap),
            r.zero_convention,
            r.converged
        )?;
    }
    Ok(())
}

fn cell_summary(
    model: ModelName,
    group: ImbalanceGroup,
    metric: MetricKind,
    values: &[f64],
) -> MetricSummary {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    MetricSummary {
        model,
        group,
        metric,
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        std: var.sqrt(),
        n,
    }
}

/// Aggregates per-client metrics into per-(model, group) summaries and the
/// relative mean-AP table against the naive baseline. Cells with no
/// defined values are omitted with a diagnostic note.
pub fn summarize(per_client: &[ClientMetrics]) -> EvaluationReport {
    let mut aucs: BTreeMap<(ModelName, ImbalanceGroup), Vec<f64>> = BTreeMap::new();
    let mut aps: BTreeMap<(ModelName, ImbalanceGroup), Vec<f64>> = BTreeMap::new();
    let mut seen: BTreeMap<(ModelName, ImbalanceGroup), usize> = BTreeMap::new();
    for row in per_client {
        let key = (row.model, row.group);
        *seen.entry(key).or_default() += 1;
        if let Some(auc) = row.auc {
            aucs.entry(key).or_default().push(auc);
        }
        if let Some(ap) = row.ap {
            aps.entry(key).or_default().push(ap);
        }
    }

    let mut summaries = Vec::new();
    let mut diagnostics = Vec::new();
    for (&(model, group), &count) in &seen {
        match aucs.get(&(model, group)) {
            Some(values) if !values.is_empty() => {
                summaries.push(cell_summary(model, group, MetricKind::Auc, values));
            }
            _ => diagnostics.push(format!(
                "cell ({model}, {group}, AUC) omitted: none of the {count} client(s) had a defined value"
            )),
        }
        match aps.get(&(model, group)) {
            Some(values) if !values.is_empty() => {
                summaries.push(cell_summary(model, group, MetricKind::Ap, values));
            }
            _ => diagnostics.push(format!(
                "cell ({model}, {group}, AP) omitted: none of the {count} client(s) had a defined value"
            )),
        }
    }

    let mut relative_map = Vec::new();
    for group in ImbalanceGroup::ALL {
        let naive_map = aps
            .get(&(ModelName::NaiveStatic, group))
            .filter(|v| !v.is_empty())
            .map(|v| v.iter().sum::<f64>() / v.len() as f64);
        for model in ModelName::ALL {
            if model == ModelName::NaiveStatic {
                continue;
            }
            let model_map = aps
                .get(&(model, group))
                .filter(|v| !v.is_empty())
                .map(|v| v.iter().sum::<f64>() / v.len() as f64);
            match (model_map, naive_map) {
                (Some(m), Some(n)) if n > 0.0 => relative_map.push(RelativeMapCell {
                    model,
                    group,
                    relative_map: relative_map_variation(m, n),
                }),
                (Some(_), _) => diagnostics.push(format!(
                    "relative MAP for ({model}, {group}) omitted: no baseline MAP"
                )),
                _ => {}
            }
        }
    }

    EvaluationReport {
        summaries,
        relative_map,
        metadata: ReportMetadata::default(),
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_constant_scores_mixed_labels_is_half() {
        let auc = roc_auc(&[0.3, 0.3, 0.3, 0.3], &[1, 0, 0, 1]).unwrap();
        assert_eq!(auc, 0.5);
    }

    #[test]
    fn auc_toy_dynamic_case_is_zero() {
        // First score 0 on the fraud, later scores positive on genuines.
        let auc = roc_auc(&[0.0, 0.7, 0.7], &[1, 0, 0]).unwrap();
        assert_eq!(auc, 0.0);
    }

    #[test]
    fn auc_perfect_ranking_is_one() {
        assert_eq!(roc_auc(&[0.9, 0.1], &[1, 0]).unwrap(), 1.0);
    }

    #[test]
    fn auc_single_class_undefined() {
        assert!(roc_auc(&[0.1, 0.9], &[0, 0]).is_none());
        assert!(roc_auc(&[0.1, 0.9], &[1, 1]).is_none());
        assert!(roc_auc(&[], &[]).is_none());
    }

    #[test]
    fn auc_matches_pairwise_oracle() {
        fn oracle(scores: &[f64], labels: &[u8]) -> Option<f64> {
            let pos: Vec<f64> = scores
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == 1)
                .map(|(&s, _)| s)
                .collect();
            let neg: Vec<f64> = scores
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == 0)
                .map(|(&s, _)| s)
                .collect();
            if pos.is_empty() || neg.is_empty() {
                return None;
            }
            let mut num = 0.0;
            for &p in &pos {
                for &n in &neg {
                    if p > n {
                        num += 1.0;
                    } else if p == n {
                        num += 0.5;
                    }
                }
            }
            Some(num / (pos.len() * neg.len()) as f64)
        }

        // Deterministic pseudo-random series with heavy tie mass.
        let mut state = 0x1234_5678_u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state
        };
        for _ in 0..500 {
            let len = (next() % 12 + 1) as usize;
            let scores: Vec<f64> = (0..len).map(|_| (next() % 5) as f64 / 4.0).collect();
            let labels: Vec<u8> = (0..len).map(|_| (next() % 2) as u8).collect();
            assert_eq!(
                roc_auc(&scores, &labels),
                oracle(&scores, &labels),
                "scores {scores:?} labels {labels:?}"
            );
        }
    }

    #[test]
    fn ap_single_positive_ranked_first() {
        assert_eq!(
            average_precision(&[0.9, 0.5, 0.1], &[1, 0, 0]).unwrap(),
            1.0
        );
    }

    #[test]
    fn ap_constant_scores_is_prevalence() {
        let ap = average_precision(&[0.2; 5], &[1, 0, 0, 1, 0]).unwrap();
        assert_eq!(ap, 2.0 / 5.0);
    }

    #[test]
    fn ap_positive_ranked_second() {
        let ap = average_precision(&[0.9, 0.5, 0.1], &[0, 1, 0]).unwrap();
        assert_eq!(ap, 0.5);
    }

    #[test]
    fn ap_no_positives_undefined() {
        assert!(average_precision(&[0.5, 0.2], &[0, 0]).is_none());
    }

    #[test]
    fn ap_matches_threshold_oracle() {
        // Brute force: walk every unique threshold, accumulate
        // (recall step) x precision.
        fn oracle(scores: &[f64], labels: &[u8]) -> Option<f64> {
            let total_pos = labels.iter().filter(|&&l| l == 1).count();
            if total_pos == 0 {
                return None;
            }
            let mut thresholds: Vec<f64> = scores.to_vec();
            thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
            thresholds.dedup();
            let mut ap = 0.0;
            let mut prev_recall = 0.0;
            for &th in &thresholds {
                let tp = scores
                    .iter()
                    .zip(labels)
                    .filter(|(&s, &l)| s >= th && l == 1)
                    .count();
                let predicted = scores.iter().filter(|&&s| s >= th).count();
                let recall = tp as f64 / total_pos as f64;
                let precision = tp as f64 / predicted as f64;
                ap += (recall - prev_recall) * precision;
                prev_recall = recall;
            }
            Some(ap)
        }

        let mut state = 0x9876_5432_u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state
        };
        for _ in 0..500 {
            let len = (next() % 12 + 1) as usize;
            let scores: Vec<f64> = (0..len).map(|_| (next() % 6) as f64 / 5.0).collect();
            let labels: Vec<u8> = (0..len).map(|_| (next() % 2) as u8).collect();
            let (got, want) = (average_precision(&scores, &labels), oracle(&scores, &labels));
            match (got, want) {
                (None, None) => {}
                (Some(g), Some(w)) => {
                    assert!((g - w).abs() < 1e-12, "scores {scores:?} labels {labels:?}")
                }
                other => panic!("definedness mismatch {other:?}"),
            }
        }
    }

    #[test]
    fn grouping_boundaries() {
        let tl = |n: usize, k: usize| {
            let times: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let labels: Vec<u8> = (0..n).map(|i| (i < k) as u8).collect();
            EventTimeline::new("c", times, labels, n as f64).unwrap()
        };
        let timelines = vec![
            tl(100, 1),  // exactly 1% -> G1
            tl(10, 0),   // fraud-free -> excluded
            tl(10, 3),   // 30% -> excluded
            tl(100, 3),  // 3% -> G2
            tl(100, 8),  // 8% -> G3
            tl(100, 15), // 15% -> G4
            tl(5, 1),    // 20% boundary -> G4
        ];
        let groups = group_clients(&timelines);
        assert_eq!(groups[&ImbalanceGroup::G1], vec![0]);
        assert_eq!(groups[&ImbalanceGroup::G2], vec![3]);
        assert_eq!(groups[&ImbalanceGroup::G3], vec![4]);
        assert_eq!(groups[&ImbalanceGroup::G4], vec![5, 6]);
    }

    fn row(
        id: &str,
        group: ImbalanceGroup,
        model: ModelName,
        auc: Option<f64>,
        ap: Option<f64>,
    ) -> ClientMetrics {
        ClientMetrics {
            client_id: id.into(),
            group,
            model,
            auc,
            ap,
            zero_convention: false,
            converged: true,
        }
    }

    #[test]
    fn summarize_single_client_degenerate_stats() {
        let report = summarize(&[row(
            "a",
            ImbalanceGroup::G1,
            ModelName::HomoStatic,
            Some(0.7),
            Some(0.4),
        )]);
        let s = &report
            .summaries
            .iter()
            .find(|s| s.metric == MetricKind::Auc)
            .unwrap();
        assert_eq!((s.max, s.mean, s.min, s.std), (0.7, 0.7, 0.7, 0.0));
    }

    #[test]
    fn summarize_naive_rows_half_auc_zero_std() {
        let rows: Vec<ClientMetrics> = (0..10)
            .map(|i| {
                row(
                    &format!("c{i}"),
                    ImbalanceGroup::G2,
                    ModelName::NaiveStatic,
                    Some(0.5),
                    Some(0.03),
                )
            })
            .collect();
        let report = summarize(&rows);
        let s = report
            .summaries
            .iter()
            .find(|s| s.metric == MetricKind::Auc)
            .unwrap();
        assert_eq!(s.mean, 0.5);
        assert_eq!(s.std, 0.0);
    }

    #[test]
    fn summarize_relative_map_formula() {
        let rows = vec![
            row(
                "a",
                ImbalanceGroup::G1,
                ModelName::LinearStatic,
                Some(0.7),
                Some(0.390334),
            ),
            row(
                "a",
                ImbalanceGroup::G1,
                ModelName::NaiveStatic,
                Some(0.5),
                Some(0.022027),
            ),
        ];
        let report = summarize(&rows);
        let rel = report
            .relative_map(ModelName::LinearStatic, ImbalanceGroup::G1)
            .unwrap();
        assert!((rel - 16.721054).abs() < 1e-3, "{rel}");
    }

    #[test]
    fn summarize_omits_empty_cells_with_diagnostic() {
        let rows = vec![row(
            "a",
            ImbalanceGroup::G1,
            ModelName::HomoStatic,
            None,
            None,
        )];
        let report = summarize(&rows);
        assert!(report.summaries.is_empty());
        assert_eq!(report.diagnostics.len(), 2);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn series() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
            proptest::collection::vec((0.0f64..1.0, 0u8..2), 2..30)
                .prop_map(|v| v.into_iter().unzip())
        }

        proptest! {
            #[test]
            fn auc_invariant_under_monotone_transform((scores, labels) in series()) {
                let transformed: Vec<f64> = scores.iter().map(|s| (3.0 * s + 1.0).exp()).collect();
                let a = roc_auc(&scores, &labels);
                let b = roc_auc(&transformed, &labels);
                match (a, b) {
                    (None, None) => {}
                    (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                    other => prop_assert!(false, "definedness changed: {:?}", other),
                }
            }

            #[test]
            fn perfect_separation_maximises_both((_, labels) in series()) {
                prop_assume!(labels.iter().any(|&l| l == 1) && labels.iter().any(|&l| l == 0));
                // Positives strictly above negatives.
                let scores: Vec<f64> = labels.iter().map(|&l| if l == 1 { 0.9 } else { 0.1 }).collect();
                prop_assert_eq!(roc_auc(&scores, &labels).unwrap(), 1.0);
                prop_assert_eq!(average_precision(&scores, &labels).unwrap(), 1.0);
                // Reversed ranking drives AUC to zero.
                let flipped: Vec<f64> = scores.iter().map(|s| 1.0 - s).collect();
                prop_assert_eq!(roc_auc(&flipped, &labels).unwrap(), 0.0);
            }
        }
    }
}
