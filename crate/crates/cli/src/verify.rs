//! Seeded invariant suites behind `gumbel verify`: each named check wraps a
//! goodness-of-fit result or a structural/moment assertion over a fixed
//! Monte Carlo budget.

use gumbel_core::topdown::assemble_perturbed_logits;
use gumbel_core::{
    analytic_grad, chi_square_gof, chi_square_two_sample, complete_condition,
    conditional_perturbed_logits, estimators, exponential_race, gs_grad, gumbel_max,
    gumbel_max_scaled, gumbel_max_subdomain, gumbel_topk, inverse_transform_sample, ks_one_sample,
    ks_two_sample, perturb, plackett_luce_prob, reinforce_grad, rejection_wor, relax,
    sequential_wor, transform_to_truncated, unordered_set_prob, variance_report, CategoricalParams,
    GofResult, GumbelParams, GumbelSoftmaxParams, IndexSubset, Objective, PartitionStrategy,
    RngState, TopDownCondition, TopDownConstruction, DEFAULT_ALPHA,
};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Exactness,
    MaxStability,
    Independence,
    Topdown,
    Wor,
    Gradients,
    All,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Exactness => "exactness",
            Self::MaxStability => "max-stability",
            Self::Independence => "independence",
            Self::Topdown => "topdown",
            Self::Wor => "wor",
            Self::Gradients => "gradients",
            Self::All => "all",
        }
    }
}

/// One named check. Statistical checks carry the test statistic, p-value
/// and degrees of freedom; structural and moment checks carry only the
/// measured statistic.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dof: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub pass: bool,
}

impl Check {
    fn gof(name: impl Into<String>, r: GofResult) -> Self {
        Self {
            name: name.into(),
            statistic: r.statistic,
            p_value: Some(r.p_value),
            dof: Some(r.dof),
            alpha: Some(r.alpha),
            pass: r.pass,
        }
    }

    fn measured(name: impl Into<String>, statistic: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            statistic,
            p_value: None,
            dof: None,
            alpha: None,
            pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

impl SuiteReport {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("suite: {}  seed: {}\n", self.suite, self.seed));
        for c in &self.checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            match c.p_value {
                Some(p) => out.push_str(&format!(
                    "{verdict}  {:<46} statistic={:<12.6} p={:.6}\n",
                    c.name, c.statistic, p
                )),
                None => out.push_str(&format!(
                    "{verdict}  {:<46} statistic={:.6}\n",
                    c.name, c.statistic
                )),
            }
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        out.push_str(&format!(
            "result: {} ({passed}/{} checks)\n",
            if self.all_pass { "PASS" } else { "FAIL" },
            self.checks.len()
        ));
        out
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> SuiteReport {
    let checks = match suite {
        Suite::Exactness => exactness_checks(seed),
        Suite::MaxStability => max_stability_checks(seed),
        Suite::Independence => independence_checks(seed),
        Suite::Topdown => topdown_checks(seed),
        Suite::Wor => wor_checks(seed),
        Suite::Gradients => gradient_checks(seed),
        Suite::All => {
            let mut all = exactness_checks(seed);
            all.extend(max_stability_checks(seed));
            all.extend(independence_checks(seed));
            all.extend(topdown_checks(seed));
            all.extend(wor_checks(seed));
            all.extend(gradient_checks(seed));
            all
        }
    };
    let all_pass = checks.iter().all(|c| c.pass);
    SuiteReport {
        suite: suite.name(),
        seed,
        checks,
        all_pass,
    }
}

fn next_uniform(rng: &mut RngState) -> f64 {
    let (u, next) = rng.next_uniform();
    *rng = next;
    u
}

fn random_categorical(n: usize, rng: &mut RngState) -> CategoricalParams {
    let logits: Vec<f64> = (0..n).map(|_| 4.0 * next_uniform(rng) - 2.0).collect();
    CategoricalParams::new(logits, 1.0).unwrap()
}

fn histogram(indices: impl IntoIterator<Item = usize>, n: usize) -> Vec<u64> {
    let mut h = vec![0u64; n];
    for i in indices {
        h[i] += 1;
    }
    h
}

fn exactness_checks(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let draws = 20_000;

    let mut meta = RngState::with_stream(seed, 10);
    for case in 0..5u64 {
        let n = 2 + (next_uniform(&mut meta) * 9.0) as usize;
        let c = random_categorical(n, &mut meta);
        let mut rng = RngState::with_stream(seed, 11 + case);
        let mut indices = Vec::with_capacity(draws);
        for _ in 0..draws {
            let (pl, next) = perturb(&c, rng);
            rng = next;
            indices.push(gumbel_max(&pl).unwrap().index);
        }
        let gof = chi_square_gof(&histogram(indices, n), &c.probs(), DEFAULT_ALPHA).unwrap();
        checks.push(Check::gof(
            format!("gumbel-max exactness #{case} (N={n})"),
            gof,
        ));
    }

    let c = CategoricalParams::from_weights(&[0.5, 0.3, 0.2]).unwrap();
    let mut rng = RngState::with_stream(seed, 20);
    let mut inv = Vec::with_capacity(draws);
    for _ in 0..draws {
        let (i, next) = inverse_transform_sample(&c, rng);
        rng = next;
        inv.push(i);
    }
    checks.push(Check::gof(
        "inverse transform vs pi",
        chi_square_gof(&histogram(inv, 3), &c.probs(), DEFAULT_ALPHA).unwrap(),
    ));

    // theta = (8, 2): the race must win with the advertised 0.8.
    let race_c = CategoricalParams::from_weights(&[8.0, 2.0]).unwrap();
    let mut rng = RngState::with_stream(seed, 21);
    let mut race_idx = Vec::with_capacity(draws);
    let mut times = Vec::with_capacity(draws);
    for _ in 0..draws {
        let (i, t, next) = exponential_race(&race_c, rng);
        rng = next;
        race_idx.push(i);
        times.push(t);
    }
    let p_hat = race_idx.iter().filter(|&&i| i == 0).count() as f64 / draws as f64;
    checks.push(Check::measured(
        "exponential race P[class 0] = 0.8 +- 0.01",
        p_hat,
        (p_hat - 0.8).abs() < 0.01,
    ));
    let mean_time = times.iter().sum::<f64>() / draws as f64;
    let se = 0.1 / (draws as f64).sqrt();
    checks.push(Check::measured(
        "race min arrival mean = 1/10 within 3 se",
        mean_time,
        (mean_time - 0.1).abs() <= 3.0 * se,
    ));

    let mut rng = RngState::with_stream(seed, 22);
    let mut max_idx = Vec::with_capacity(draws);
    for _ in 0..draws {
        let (pl, next) = perturb(&race_c, rng);
        rng = next;
        max_idx.push(gumbel_max(&pl).unwrap().index);
    }
    checks.push(Check::gof(
        "race vs gumbel-max histogram",
        chi_square_two_sample(
            &histogram(race_idx, 2),
            &histogram(max_idx, 2),
            DEFAULT_ALPHA,
        )
        .unwrap(),
    ));

    let b = IndexSubset::new(vec![1, 2]).unwrap();
    let mut rng = RngState::with_stream(seed, 23);
    let mut sub = Vec::with_capacity(draws);
    for _ in 0..draws {
        let (pl, next) = perturb(&c, rng);
        rng = next;
        sub.push(gumbel_max_subdomain(&pl, &b).unwrap().index);
    }
    let counts: Vec<u64> = histogram(sub, 3)[1..].to_vec();
    checks.push(Check::gof(
        "sub-domain renormalization {1,2}",
        chi_square_gof(&counts, &[0.6, 0.4], DEFAULT_ALPHA).unwrap(),
    ));

    checks
}

fn max_stability_checks(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let draws = 50_000;
    let c = CategoricalParams::from_weights(&[2.0, 5.0, 3.0]).unwrap();
    let log_z = c.log_partition();

    let mut rng = RngState::with_stream(seed, 30);
    let mut maxima = Vec::with_capacity(draws);
    for _ in 0..draws {
        let (pl, next) = perturb(&c, rng);
        rng = next;
        maxima.push(gumbel_max(&pl).unwrap().max_value);
    }
    let reference = GumbelParams::new(log_z, 1.0).unwrap();
    let (m0, v0) = reference.moments();
    let mean = maxima.iter().sum::<f64>() / draws as f64;
    let var = maxima.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (draws as f64 - 1.0);
    checks.push(Check::measured(
        "max mean = log Z + gamma within 3 se",
        mean,
        (mean - m0).abs() <= 3.0 * (v0 / draws as f64).sqrt(),
    ));
    checks.push(Check::measured(
        "max variance = pi^2/6 within 3 se",
        var,
        gumbel_core::moment_check(&maxima, m0, v0, 3.0),
    ));
    checks.push(Check::gof(
        "max KS vs Gumbel(log Z)",
        ks_one_sample(&maxima, |x| reference.cdf(x).unwrap(), DEFAULT_ALPHA).unwrap(),
    ));

    // Scaled noise: index law retempered, maximum rescaled and relocated.
    let a = CategoricalParams::new(vec![1.0, 0.0], 1.0).unwrap();
    let noise = GumbelParams::new(0.0, 2.0).unwrap();
    let mut rng = RngState::with_stream(seed, 31);
    let mut indices = Vec::with_capacity(draws);
    let mut scaled_max = Vec::with_capacity(draws);
    for _ in 0..draws {
        let (draw, next) = gumbel_max_scaled(&a, &noise, rng);
        rng = next;
        indices.push(draw.index);
        scaled_max.push(draw.max_value);
    }
    let retempered = CategoricalParams::new(vec![1.0, 0.0], 2.0).unwrap();
    checks.push(Check::gof(
        "scaled noise index law Cat(a, T beta)",
        chi_square_gof(&histogram(indices, 2), &retempered.probs(), DEFAULT_ALPHA).unwrap(),
    ));
    let scaled_ref = GumbelParams::new(2.0 * retempered.log_partition(), 2.0).unwrap();
    checks.push(Check::gof(
        "scaled noise max KS vs Gumbel(beta log Z', beta)",
        ks_one_sample(&scaled_max, |x| scaled_ref.cdf(x).unwrap(), DEFAULT_ALPHA).unwrap(),
    ));

    checks
}

fn independence_checks(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let draws = 50_000;
    let c = CategoricalParams::from_weights(&[0.4, 0.3, 0.2, 0.1]).unwrap();

    let mut rng = RngState::with_stream(seed, 40);
    let mut by_index: Vec<Vec<f64>> = vec![Vec::new(); 4];
    for _ in 0..draws {
        let (pl, next) = perturb(&c, rng);
        rng = next;
        let d = gumbel_max(&pl).unwrap();
        by_index[d.index].push(d.max_value);
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            checks.push(Check::gof(
                format!("max | argmax={i} vs max | argmax={j} (KS)"),
                ks_two_sample(&by_index[i], &by_index[j], DEFAULT_ALPHA).unwrap(),
            ));
        }
    }

    // Forked streams: joint 4x4 uniformity of paired draws.
    let parent = RngState::with_stream(seed, 41);
    let mut a = parent.fork_stream(42);
    let mut b = parent.fork_stream(43);
    let mut cells = vec![0u64; 16];
    for _ in 0..draws {
        let (u, na) = a.next_uniform();
        let (v, nb) = b.next_uniform();
        a = na;
        b = nb;
        cells[(u * 4.0) as usize * 4 + (v * 4.0) as usize] += 1;
    }
    checks.push(Check::gof(
        "forked streams joint uniformity",
        chi_square_gof(&cells, &[1.0 / 16.0; 16], DEFAULT_ALPHA).unwrap(),
    ));

    checks
}

fn topdown_checks(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let runs = 20_000;
    let c = CategoricalParams::from_weights(&[0.35, 0.25, 0.2, 0.12, 0.08]).unwrap();
    let n = c.len();
    let log_z = c.log_partition();

    // Route A: conditional vectors from sampled (omega, m).
    let mut rng = RngState::with_stream(seed, 50);
    let mut vectors = Vec::with_capacity(runs);
    let mut violations = 0usize;
    for _ in 0..runs {
        let (omega, next) = inverse_transform_sample(&c, rng);
        let (omega, m, next) =
            complete_condition(&TopDownCondition::index(omega), &c, next).unwrap();
        let (pl, next) = conditional_perturbed_logits(omega, m, &c, next).unwrap();
        rng = next;
        if pl.values()[omega] != m
            || pl.values().iter().any(|&v| v > m)
            || gumbel_max(&pl).unwrap().index != omega
        {
            violations += 1;
        }
        vectors.push(pl.values().to_vec());
    }
    checks.push(Check::measured(
        "conditional vectors: structural invariants",
        violations as f64,
        violations == 0,
    ));
    push_bottom_up_law_checks(&mut checks, &c, &vectors, "conditional route");

    // Route B: transform unconditional vectors to a sampled maximum.
    let mut rng = RngState::with_stream(seed, 51);
    let mut vectors = Vec::with_capacity(runs);
    let mut violations = 0usize;
    for _ in 0..runs {
        let (pl, next) = perturb(&c, rng);
        let (u, next) = next.next_uniform();
        rng = next;
        let m = GumbelParams::new(log_z, 1.0).unwrap().icdf(u).unwrap();
        let before = gumbel_max(&pl).unwrap().index;
        let out = transform_to_truncated(&pl, m);
        let after = gumbel_max(&out).unwrap();
        if after.max_value != m || after.index != before {
            violations += 1;
        }
        vectors.push(out.values().to_vec());
    }
    checks.push(Check::measured(
        "truncation transform: structural invariants",
        violations as f64,
        violations == 0,
    ));
    push_bottom_up_law_checks(&mut checks, &c, &vectors, "transform route");

    // Route C: full construction, both partition rules.
    for (strategy, label, stream) in [
        (
            PartitionStrategy::MedianSplit,
            "construction (median split)",
            52u64,
        ),
        (
            PartitionStrategy::RandomSplit,
            "construction (random split)",
            53,
        ),
    ] {
        let mut rng = RngState::with_stream(seed, stream);
        let mut vectors = Vec::with_capacity(runs);
        let mut violations = 0usize;
        for _ in 0..runs {
            let mut construction = TopDownConstruction::new(&c, strategy, rng);
            let nodes: Vec<_> = construction.by_ref().collect();
            rng = construction.rng_state();
            let mut omegas: Vec<usize> = nodes.iter().map(|nd| nd.index).collect();
            omegas.sort_unstable();
            if omegas != (0..n).collect::<Vec<_>>()
                || nodes
                    .iter()
                    .any(|nd| nd.max_value > nd.parent_max || !nd.domain.contains(nd.index))
            {
                violations += 1;
            }
            vectors.push(assemble_perturbed_logits(&c, &nodes).values().to_vec());
        }
        checks.push(Check::measured(
            format!("{label}: structural invariants"),
            violations as f64,
            violations == 0,
        ));
        push_bottom_up_law_checks(&mut checks, &c, &vectors, label);
    }

    checks
}

fn push_bottom_up_law_checks(
    checks: &mut Vec<Check>,
    c: &CategoricalParams,
    vectors: &[Vec<f64>],
    label: &str,
) {
    let n = c.len();
    let mut argmax_hist = vec![0u64; n];
    for v in vectors {
        let mut best = 0;
        for i in 1..n {
            if v[i] > v[best] {
                best = i;
            }
        }
        argmax_hist[best] += 1;
    }
    checks.push(Check::gof(
        format!("{label}: argmax law vs pi"),
        chi_square_gof(&argmax_hist, &c.probs(), DEFAULT_ALPHA).unwrap(),
    ));
    for i in 0..n {
        let xs: Vec<f64> = vectors.iter().map(|v| v[i]).collect();
        let reference = GumbelParams::new(c.effective_logit(i), 1.0).unwrap();
        checks.push(Check::gof(
            format!("{label}: coordinate {i} KS vs Gumbel(log theta)"),
            ks_one_sample(&xs, |x| reference.cdf(x).unwrap(), DEFAULT_ALPHA).unwrap(),
        ));
    }
}

fn wor_checks(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let c = CategoricalParams::from_weights(&[0.4, 0.3, 0.2, 0.1]).unwrap();
    let (n, k) = (4usize, 2usize);

    let sequences: Vec<Vec<usize>> = {
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    out.push(vec![i, j]);
                }
            }
        }
        out
    };
    let code = |seq: &[usize]| seq[0] * n + seq[1];
    let mut expected = vec![0.0; n * n];
    for seq in &sequences {
        expected[code(seq)] = plackett_luce_prob(&c, seq).unwrap();
    }

    let draws = 100_000;
    let mut rng = RngState::with_stream(seed, 60);
    let mut topk_hist = vec![0u64; n * n];
    for _ in 0..draws {
        let (pl, next) = perturb(&c, rng);
        rng = next;
        topk_hist[code(gumbel_topk(&pl, k).unwrap().indices())] += 1;
    }
    checks.push(Check::gof(
        "gumbel-top-k ordered law vs Plackett-Luce",
        chi_square_gof(&topk_hist, &expected, DEFAULT_ALPHA).unwrap(),
    ));

    let mut rng = RngState::with_stream(seed, 61);
    let mut seq_hist = vec![0u64; n * n];
    for _ in 0..draws {
        let (seq, next) = sequential_wor(&c, k, rng).unwrap();
        rng = next;
        seq_hist[code(&seq)] += 1;
    }
    checks.push(Check::gof(
        "sequential renormalization ordered law",
        chi_square_gof(&seq_hist, &expected, DEFAULT_ALPHA).unwrap(),
    ));
    checks.push(Check::gof(
        "gumbel-top-k vs sequential (two-sample)",
        chi_square_two_sample(&topk_hist, &seq_hist, DEFAULT_ALPHA).unwrap(),
    ));

    // Unordered sets against the permutation sum.
    let subsets = [
        vec![0, 1],
        vec![0, 2],
        vec![0, 3],
        vec![1, 2],
        vec![1, 3],
        vec![2, 3],
    ];
    let set_expected: Vec<f64> = subsets
        .iter()
        .map(|s| unordered_set_prob(&c, &IndexSubset::new(s.clone()).unwrap()).unwrap())
        .collect();
    let set_pos = |set: &[usize]| subsets.iter().position(|s| s == set).unwrap();
    let mut set_hist = vec![0u64; subsets.len()];
    for (&count, seq) in topk_hist.iter().zip(0..n * n) {
        if count > 0 {
            let mut set = vec![seq / n, seq % n];
            set.sort_unstable();
            set_hist[set_pos(&set)] += count;
        }
    }
    checks.push(Check::gof(
        "unordered set frequencies vs permutation sum",
        chi_square_gof(&set_hist, &set_expected, DEFAULT_ALPHA).unwrap(),
    ));

    // Rejection sampling: same set law, coupon-collector proposal count.
    let mut rng = RngState::with_stream(seed, 62);
    let mut rej_hist = vec![0u64; subsets.len()];
    for _ in 0..50_000 {
        let (set, _, next) = rejection_wor(&c, k, rng, 100_000).unwrap();
        rng = next;
        rej_hist[set_pos(set.members())] += 1;
    }
    checks.push(Check::gof(
        "rejection sampling set law",
        chi_square_gof(&rej_hist, &set_expected, DEFAULT_ALPHA).unwrap(),
    ));

    let uniform = CategoricalParams::new(vec![0.0; 4], 1.0).unwrap();
    let reps = 2000;
    let mut rng = RngState::with_stream(seed, 63);
    let mut total = 0.0;
    for _ in 0..reps {
        let (_, proposals, next) = rejection_wor(&uniform, 4, rng, 100_000).unwrap();
        rng = next;
        total += proposals as f64;
    }
    let mean = total / reps as f64;
    let expected_mean = 4.0 * (1.0 + 0.5 + 1.0 / 3.0 + 0.25);
    let se = (14.444f64 / reps as f64).sqrt();
    checks.push(Check::measured(
        "coupon-collector proposal count within 3 se",
        mean,
        (mean - expected_mean).abs() <= 3.0 * se,
    ));

    checks
}

fn gradient_checks(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let n_samples = 50_000;

    // REINFORCE vs the analytic gradient on three random instances.
    let mut meta = RngState::with_stream(seed, 70);
    for case in 0..3u64 {
        let n = 2 + (next_uniform(&mut meta) * 4.0) as usize;
        let c = random_categorical(n, &mut meta);
        let payoff: Vec<f64> = (0..n)
            .map(|_| 4.0 * next_uniform(&mut meta) - 1.0)
            .collect();
        let obj = Objective::linear(payoff);
        let (report, _) =
            reinforce_grad(&c, &obj, n_samples, RngState::with_stream(seed, 71 + case));
        let max_z = report
            .grad_mean
            .iter()
            .zip(&report.oracle_grad)
            .zip(&report.grad_std_err)
            .map(|((m, o), se)| (m - o).abs() / se.max(1e-12))
            .fold(0.0f64, f64::max);
        checks.push(Check::measured(
            format!("reinforce unbiasedness #{case} (max |z|)"),
            max_z,
            max_z <= 3.0,
        ));
    }

    // Score function has zero mean.
    let c = CategoricalParams::from_weights(&[0.5, 0.3, 0.2]).unwrap();
    let ones = Objective::linear(vec![1.0, 1.0, 1.0]);
    let (score, _) = reinforce_grad(&c, &ones, n_samples, RngState::with_stream(seed, 74));
    let max_z = score
        .grad_mean
        .iter()
        .zip(&score.grad_std_err)
        .map(|(m, se)| m.abs() / se.max(1e-12))
        .fold(0.0f64, f64::max);
    checks.push(Check::measured(
        "score function zero mean (max |z|)",
        max_z,
        max_z <= 3.0,
    ));

    // Pathwise gradient vs frozen-noise central finite differences.
    let obj = Objective::linear(vec![1.0, 2.0, 3.0]);
    let lambda = 0.5;
    let logits = vec![0.5f64.ln(), 0.3f64.ln(), 0.2f64.ln()];
    let mut rng = RngState::with_stream(seed, 75);
    let noise_set: Vec<Vec<f64>> = (0..512)
        .map(|_| {
            (0..3)
                .map(|_| {
                    GumbelParams::standard()
                        .icdf(next_uniform(&mut rng))
                        .unwrap()
                })
                .collect()
        })
        .collect();
    let params = |l: &[f64]| {
        GumbelSoftmaxParams::new(CategoricalParams::new(l.to_vec(), 1.0).unwrap(), lambda).unwrap()
    };
    let p = params(&logits);
    let mut grad = [0.0; 3];
    for noise in &noise_set {
        let g = estimators::gs_pathwise_grad_with_noise(&p, &obj, noise);
        for (a, x) in grad.iter_mut().zip(&g) {
            *a += x;
        }
    }
    grad.iter_mut().for_each(|a| *a /= noise_set.len() as f64);
    let frozen = |l: &[f64]| -> f64 {
        let p = params(l);
        noise_set
            .iter()
            .map(|noise| obj.value(relax::gs_sample_with_noise(&p, noise).weights()))
            .sum::<f64>()
            / noise_set.len() as f64
    };
    let h = 1e-4;
    let mut max_rel = 0.0f64;
    let mut scale = 1e-8f64;
    let mut fd = [0.0; 3];
    for j in 0..3 {
        let mut up = logits.clone();
        let mut dn = logits.clone();
        up[j] += h;
        dn[j] -= h;
        fd[j] = (frozen(&up) - frozen(&dn)) / (2.0 * h);
        scale = scale.max(fd[j].abs());
    }
    for (g, f) in grad.iter().zip(&fd) {
        max_rel = max_rel.max((g - f).abs() / scale);
    }
    checks.push(Check::measured(
        "pathwise gradient vs frozen-noise FD (rel err)",
        max_rel,
        max_rel <= 1e-5,
    ));

    // Bias shrinks with lambda; variance grows.
    let (cold, _) = gs_grad(
        &GumbelSoftmaxParams::new(c.clone(), 0.1).unwrap(),
        &obj,
        n_samples,
        RngState::with_stream(seed, 76),
    );
    let (hot, _) = gs_grad(
        &GumbelSoftmaxParams::new(c.clone(), 2.0).unwrap(),
        &obj,
        n_samples,
        RngState::with_stream(seed, 77),
    );
    checks.push(Check::measured(
        "GS bias at lambda 0.1 below bias at 2.0",
        hot.max_abs_bias - cold.max_abs_bias,
        cold.max_abs_bias < hot.max_abs_bias,
    ));

    let (rows, _) = variance_report(
        &c,
        &obj,
        &[0.1, 1.0],
        200,
        100,
        RngState::with_stream(seed, 78),
    );
    let cold_var = rows[1].total_variance;
    let hot_var = rows[2].total_variance;
    checks.push(Check::measured(
        "GS variance at lambda 0.1 above variance at 1.0",
        cold_var - hot_var,
        cold_var > hot_var,
    ));
    let reinforce_bias_ok = rows[0]
        .grad_mean
        .iter()
        .zip(analytic_grad(&c, &obj).iter())
        .zip(&rows[0].grad_variance)
        .all(|((m, o), v)| (m - o).abs() <= 3.0 * (v / rows[0].n_reps as f64).sqrt());
    checks.push(Check::measured(
        "variance table: reinforce bias within 3 se",
        rows[0].max_abs_bias,
        reinforce_bias_ok,
    ));

    checks
}
