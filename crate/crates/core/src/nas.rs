//! Naive architecture search: exhaustive grid evaluation with k-fold
//! cross-validation, a top-M accuracy filter and minimum-complexity choice.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autoencoder::{loss_recon, train, ArchSpec, TrainConfig};
use crate::curves::ResponseCurve;
use crate::error::{Error, Result};

/// Hidden-layer width options; 0 marks an absent second or third layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub h1: Vec<usize>,
    pub h2: Vec<usize>,
    pub h3: Vec<usize>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            h1: vec![10, 20, 50, 100, 200, 500],
            h2: vec![0, 10, 20, 50, 100, 200],
            h3: vec![0, 10, 20, 50, 100],
        }
    }
}

impl SearchSpace {
    /// Candidate hidden-layer lists in lexicographic `(h1, h2, h3)` order of
    /// the option lists, skipping `h2 = 0` with `h3 > 0`.
    pub fn hidden_layers(&self) -> Result<Vec<Vec<usize>>> {
        if self.h1.is_empty() || self.h2.is_empty() || self.h3.is_empty() {
            return Err(Error::InvalidArgument(
                "search space option lists must be non-empty".into(),
            ));
        }
        if self.h1.contains(&0) {
            return Err(Error::InvalidArgument("h1 options must be positive".into()));
        }
        let mut out = Vec::new();
        for &a in &self.h1 {
            for &b in &self.h2 {
                for &c in &self.h3 {
                    if b == 0 && c > 0 {
                        continue;
                    }
                    let layers: Vec<usize> = [a, b, c].into_iter().filter(|&w| w > 0).collect();
                    out.push(layers);
                }
            }
        }
        Ok(out)
    }
}

/// All candidate architectures of `space` for curves of `input_size` samples.
pub fn enumerate_space(space: &SearchSpace, input_size: usize, latent_dim: usize) -> Result<Vec<ArchSpec>> {
    space
        .hidden_layers()?
        .into_iter()
        .map(|h| {
            let arch = ArchSpec::new(h)?
                .with_input_size(input_size)
                .with_latent_dim(latent_dim);
            arch.validate()?;
            Ok(arch)
        })
        .collect()
}

pub fn complexity(arch: &ArchSpec) -> usize {
    arch.complexity()
}

/// Search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NasConfig {
    pub train: TrainConfig,
    pub folds: usize,
    pub top_m: usize,
    /// Global seed: drives the fold shuffle; candidate `i` trains with
    /// `seed + i`.
    pub seed: u64,
    pub latent_dim: usize,
    pub dropout_keep: f64,
}

impl Default for NasConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            folds: 3,
            top_m: 10,
            seed: 0,
            latent_dim: 1,
            dropout_keep: 0.9,
        }
    }
}

/// Fold index of every curve: a seeded shuffle, then position modulo `folds`.
pub fn fold_assignment(count: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..count).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; count];
    for (pos, &idx) in order.iter().enumerate() {
        fold[idx] = pos % folds;
    }
    fold
}

/// Mean held-out reconstruction MSE over `folds` folds.
pub fn cv_accuracy(
    arch: &ArchSpec,
    curves: &[ResponseCurve],
    train_config: &TrainConfig,
    folds: usize,
    shuffle_seed: u64,
) -> Result<f64> {
    if folds < 2 {
        return Err(Error::InvalidArgument("cross-validation needs at least 2 folds".into()));
    }
    if curves.len() < folds {
        return Err(Error::InvalidArgument(format!(
            "{} curves cannot fill {folds} folds",
            curves.len()
        )));
    }
    let assignment = fold_assignment(curves.len(), folds, shuffle_seed);
    let mut total = 0.0;
    for k in 0..folds {
        let (held, kept): (Vec<_>, Vec<_>) = curves.iter().zip(&assignment).partition(|(_, &f)| f == k);
        let kept: Vec<ResponseCurve> = kept.into_iter().map(|(c, _)| c.clone()).collect();
        let held: Vec<ResponseCurve> = held.into_iter().map(|(c, _)| c.clone()).collect();
        let (model, _) = train(&kept, arch, train_config)?;
        let latents = model.encode_batch(&held)?;
        let mut fold_mse = 0.0;
        for (c, z) in held.iter().zip(latents.rows()) {
            let rec = model.decode(&z.to_vec())?;
            fold_mse += loss_recon(c.samples(), rec.samples())?;
        }
        total += fold_mse / held.len() as f64;
    }
    Ok(total / folds as f64)
}

/// One evaluated candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub arch: ArchSpec,
    /// Cross-validated MSE (lower is better); `None` if training failed.
    pub accuracy: Option<f64>,
    pub complexity: usize,
    /// 1-based position by accuracy among successful candidates.
    pub rank: Option<usize>,
    pub error: Option<String>,
}

/// Minimal view of a scored candidate used by [`select`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub accuracy: f64,
    pub complexity: usize,
    /// Position in the enumeration order (the lexicographic tie-breaker).
    pub order: usize,
}

fn by_accuracy(a: &Score, b: &Score) -> Ordering {
    a.accuracy.total_cmp(&b.accuracy).then(a.order.cmp(&b.order))
}

/// Selection step: keep the `top_m` lowest-MSE scores, return the index
/// (into `scores`) of the least complex of them; ties go to the better
/// accuracy, then the earlier enumeration order.
pub fn select(scores: &[Score], top_m: usize) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument("no scored candidates".into()));
    }
    if top_m == 0 {
        return Err(Error::InvalidArgument("top-M must be at least 1".into()));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| by_accuracy(&scores[a], &scores[b]));
    idx.truncate(top_m.min(scores.len()));
    Ok(idx
        .into_iter()
        .min_by(|&a, &b| {
            scores[a]
                .complexity
                .cmp(&scores[b].complexity)
                .then(by_accuracy(&scores[a], &scores[b]))
        })
        .expect("non-empty"))
}

/// Search outcome: the chosen architecture and the full table in
/// enumeration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NasOutcome {
    pub selected: usize,
    pub table: Vec<CandidateResult>,
    pub top_m: usize,
    pub folds: usize,
}

impl NasOutcome {
    pub fn selected(&self) -> &CandidateResult {
        &self.table[self.selected]
    }
}

/// Ranks evaluated candidates and applies [`select`]. `accuracies[i]` is
/// the outcome for `archs[i]`.
pub fn rank_candidates(
    archs: Vec<ArchSpec>,
    accuracies: Vec<Result<f64>>,
    top_m: usize,
    folds: usize,
) -> Result<NasOutcome> {
    let mut table: Vec<CandidateResult> = archs
        .into_iter()
        .zip(accuracies)
        .map(|(arch, acc)| {
            let complexity = arch.complexity();
            let (accuracy, error) = match acc {
                Ok(a) if a.is_finite() => (Some(a), None),
                Ok(a) => (None, Some(format!("non-finite accuracy {a}"))),
                Err(e) => (None, Some(e.to_string())),
            };
            CandidateResult {
                arch,
                accuracy,
                complexity,
                rank: None,
                error,
            }
        })
        .collect();
    let scored: Vec<(usize, Score)> = table
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            c.accuracy.map(|accuracy| {
                (
                    i,
                    Score {
                        accuracy,
                        complexity: c.complexity,
                        order: i,
                    },
                )
            })
        })
        .collect();
    if scored.is_empty() {
        let first = table.iter().find_map(|c| c.error.clone()).unwrap_or_default();
        return Err(Error::InvalidArgument(format!(
            "every candidate failed (first error: {first})"
        )));
    }
    let mut ranked: Vec<&(usize, Score)> = scored.iter().collect();
    ranked.sort_by(|a, b| by_accuracy(&a.1, &b.1));
    for (r, (i, _)) in ranked.iter().enumerate() {
        table[*i].rank = Some(r + 1);
    }
    let scores: Vec<Score> = scored.iter().map(|(_, s)| *s).collect();
    let pick = select(&scores, top_m)?;
    Ok(NasOutcome {
        selected: scored[pick].0,
        table,
        top_m,
        folds,
    })
}

/// Evaluates every candidate of `space` and selects one. Candidates run in
/// parallel on the current rayon pool; results do not depend on scheduling.
pub fn naive_nas(space: &SearchSpace, curves: &[ResponseCurve], config: &NasConfig) -> Result<NasOutcome> {
    let input_size = curves
        .first()
        .ok_or_else(|| Error::InvalidArgument("no curves".into()))?
        .len();
    let archs: Vec<ArchSpec> = enumerate_space(space, input_size, config.latent_dim)?
        .into_iter()
        .map(|a| a.with_dropout_keep(config.dropout_keep))
        .collect();
    if config.top_m == 0 {
        return Err(Error::InvalidArgument("top-M must be at least 1".into()));
    }
    let accuracies: Vec<Result<f64>> = archs
        .par_iter()
        .enumerate()
        .map(|(i, arch)| {
            let train_config = TrainConfig {
                seed: config.seed.wrapping_add(i as u64),
                ..config.train.clone()
            };
            log::info!("candidate {}/{}: {arch}", i + 1, archs.len());
            cv_accuracy(arch, curves, &train_config, config.folds, config.seed)
                .map_err(|e| Error::InvalidArgument(format!("{arch}: {e}")))
        })
        .collect();
    rank_candidates(archs, accuracies, config.top_m, config.folds)
}

/// CSV report: one row per candidate in enumeration order.
pub fn report_csv(outcome: &NasOutcome) -> String {
    let mut out = String::from("arch_h1,arch_h2,arch_h3,latent_dim,accuracy_mse,complexity,rank\n");
    for c in &outcome.table {
        let [h1, h2, h3] = c.arch.hidden_triplet();
        let acc = c.accuracy.map(|a| format!("{a:e}")).unwrap_or_default();
        let rank = c.rank.map(|r| r.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{h1},{h2},{h3},{},{acc},{},{rank}\n",
            c.arch.latent_dim, c.complexity
        ));
    }
    out
}

/// Parses a report written by [`report_csv`] back into rows.
pub fn parse_report_csv(text: &str) -> Result<Vec<ReportRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub arch_h1: usize,
    pub arch_h2: usize,
    pub arch_h3: usize,
    pub latent_dim: usize,
    pub accuracy_mse: Option<f64>,
    pub complexity: usize,
    pub rank: Option<usize>,
}

/// Summary document naming the selected architecture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NasSummary {
    pub selected: ArchSpec,
    pub selected_hidden: [usize; 3],
    pub accuracy_mse: f64,
    pub complexity: usize,
    pub rank: usize,
    pub candidates: usize,
    pub failed: usize,
    pub top_m: usize,
    pub folds: usize,
}

impl NasSummary {
    pub fn of(outcome: &NasOutcome) -> Self {
        let s = outcome.selected();
        Self {
            selected: s.arch.clone(),
            selected_hidden: s.arch.hidden_triplet(),
            accuracy_mse: s.accuracy.unwrap_or(f64::NAN),
            complexity: s.complexity,
            rank: s.rank.unwrap_or(0),
            candidates: outcome.table.len(),
            failed: outcome.table.iter().filter(|c| c.accuracy.is_none()).count(),
            top_m: outcome.top_m,
            folds: outcome.folds,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::surrogate;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn default_space_has_156() {
        let archs = enumerate_space(&SearchSpace::default(), 1024, 1).unwrap();
        assert_eq!(archs.len(), 156);
        assert!(archs.iter().all(|a| {
            let [_, h2, h3] = a.hidden_triplet();
            !(h2 == 0 && h3 > 0)
        }));
    }

    #[test]
    fn small_spaces() {
        let one = SearchSpace {
            h1: vec![10],
            h2: vec![0],
            h3: vec![0],
        };
        assert_eq!(one.hidden_layers().unwrap(), vec![vec![10]]);
        let three = SearchSpace {
            h1: vec![10],
            h2: vec![0, 10],
            h3: vec![0, 10],
        };
        assert_eq!(
            three.hidden_layers().unwrap(),
            vec![vec![10], vec![10, 10], vec![10, 10, 10]]
        );
        let empty = SearchSpace {
            h1: vec![],
            ..SearchSpace::default()
        };
        assert!(empty.hidden_layers().is_err());
    }

    #[test]
    fn complexity_monotone() {
        let base = ArchSpec::new(vec![20, 10]).unwrap();
        let wider = ArchSpec::new(vec![20, 11]).unwrap();
        let deeper = ArchSpec::new(vec![20, 10, 1]).unwrap();
        assert!(complexity(&wider) > complexity(&base));
        assert!(complexity(&deeper) > complexity(&base));
    }

    #[test]
    fn folds_balanced_and_seeded() {
        let f = fold_assignment(201, 3, 7);
        for k in 0..3 {
            assert_eq!(f.iter().filter(|&&x| x == k).count(), 67);
        }
        assert_eq!(f, fold_assignment(201, 3, 7));
        assert_ne!(f, fold_assignment(201, 3, 8));
    }

    /// Direct transcription of the algorithm over a score table.
    fn brute_force(scores: &[Score], m: usize) -> usize {
        let mut sorted: Vec<usize> = (0..scores.len()).collect();
        // bubble sort by (accuracy, order) to stay independent of `select`
        for i in 0..sorted.len() {
            for j in 0..sorted.len() - 1 - i {
                let (a, b) = (&scores[sorted[j]], &scores[sorted[j + 1]]);
                if a.accuracy > b.accuracy || (a.accuracy == b.accuracy && a.order > b.order) {
                    sorted.swap(j, j + 1);
                }
            }
        }
        let top = &sorted[..m.min(scores.len())];
        let mut best = top[0];
        for &i in &top[1..] {
            let (c, b) = (&scores[i], &scores[best]);
            if c.complexity < b.complexity
                || (c.complexity == b.complexity
                    && (c.accuracy < b.accuracy || (c.accuracy == b.accuracy && c.order < b.order)))
            {
                best = i;
            }
        }
        best
    }

    fn random_table(rng: &mut ChaCha8Rng) -> Vec<Score> {
        let n = rng.random_range(1..60);
        (0..n)
            .map(|order| Score {
                // coarse values force ties
                accuracy: rng.random_range(0..12) as f64 * 1e-4,
                complexity: rng.random_range(1..15) * 1000,
                order,
            })
            .collect()
    }

    #[test]
    fn selection_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let table = random_table(&mut rng);
            let m = rng.random_range(1..=table.len());
            assert_eq!(select(&table, m).unwrap(), brute_force(&table, m));
        }
    }

    #[test]
    fn selection_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let table = random_table(&mut rng);
            let min_c = table.iter().map(|s| s.complexity).min().unwrap();
            assert_eq!(table[select(&table, table.len()).unwrap()].complexity, min_c);
            let min_a = table.iter().map(|s| s.accuracy).fold(f64::INFINITY, f64::min);
            assert_eq!(table[select(&table, 1).unwrap()].accuracy, min_a);
        }
    }

    proptest! {
        #[test]
        fn selected_is_in_top_m_with_min_complexity(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let table = random_table(&mut rng);
            let m = rng.random_range(1..=table.len());
            let pick = select(&table, m).unwrap();
            let better = table.iter().filter(|s| by_accuracy(s, &table[pick]) == Ordering::Less).count();
            let mut sorted = table.clone();
            sorted.sort_by(by_accuracy);
            let top = &sorted[..m];
            prop_assert!(top.iter().any(|s| s.order == pick));
            prop_assert!(top.iter().all(|s| s.complexity >= table[pick].complexity));
            prop_assert!(better < table.len());
        }
    }

    #[test]
    fn injected_failures_are_skipped() {
        let archs = enumerate_space(
            &SearchSpace {
                h1: vec![10, 20],
                h2: vec![0],
                h3: vec![0],
            },
            16,
            1,
        )
        .unwrap();
        let out = rank_candidates(archs.clone(), vec![Err(Error::Diverged { epoch: 3 }), Ok(0.5)], 2, 3).unwrap();
        assert_eq!(out.selected, 1);
        assert_eq!(out.table[0].rank, None);
        assert!(rank_candidates(archs, vec![Err(Error::Diverged { epoch: 3 }), Ok(f64::NAN)], 1, 3).is_err());
    }

    fn smoke_curves() -> Vec<ResponseCurve> {
        surrogate::generate(9, 16, 3).unwrap()
    }

    fn smoke_config() -> NasConfig {
        NasConfig {
            train: TrainConfig {
                epochs: 40,
                ..Default::default()
            },
            top_m: 2,
            seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn cv_accuracy_deterministic() {
        let curves = smoke_curves();
        let arch = ArchSpec::new(vec![4]).unwrap().with_input_size(16);
        let cfg = smoke_config().train;
        let a = cv_accuracy(&arch, &curves, &cfg, 3, 1).unwrap();
        let b = cv_accuracy(&arch, &curves, &cfg, 3, 1).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(a.is_finite() && a >= 0.0);
        assert!(cv_accuracy(&arch, &curves[..2], &cfg, 3, 1).is_err());
    }

    #[test]
    fn parallel_matches_serial() {
        let space = SearchSpace {
            h1: vec![3, 5],
            h2: vec![0, 2],
            h3: vec![0],
        };
        let curves = smoke_curves();
        let cfg = smoke_config();
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| naive_nas(&space, &curves, &cfg).unwrap());
        let parallel = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| naive_nas(&space, &curves, &cfg).unwrap());
        assert_eq!(serial, parallel);
        assert_eq!(report_csv(&serial), report_csv(&parallel));
        assert_eq!(serial.table.len(), 4);
        assert!(serial.table.iter().all(|c| c.accuracy.unwrap().is_finite()));
    }

    #[test]
    fn csv_round_trip() {
        let archs = enumerate_space(
            &SearchSpace {
                h1: vec![10, 20],
                h2: vec![0, 5],
                h3: vec![0],
            },
            16,
            1,
        )
        .unwrap();
        let out = rank_candidates(
            archs,
            vec![Ok(0.125), Err(Error::Diverged { epoch: 1 }), Ok(1.0 / 3.0), Ok(2e-5)],
            2,
            3,
        )
        .unwrap();
        let text = report_csv(&out);
        let rows = parse_report_csv(&text).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[2].accuracy_mse, Some(1.0 / 3.0));
        assert_eq!(rows[1].accuracy_mse, None);
        assert_eq!(rows[3].rank, Some(1));
        let mut again = String::from("arch_h1,arch_h2,arch_h3,latent_dim,accuracy_mse,complexity,rank\n");
        for r in &rows {
            again.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.arch_h1,
                r.arch_h2,
                r.arch_h3,
                r.latent_dim,
                r.accuracy_mse.map(|a| format!("{a:e}")).unwrap_or_default(),
                r.complexity,
                r.rank.map(|x| x.to_string()).unwrap_or_default()
            ));
        }
        assert_eq!(again, text);
    }
}
