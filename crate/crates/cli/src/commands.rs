//! Subcommand bodies. Each one validates its configuration, calls the
//! library and writes the library's own CSV output into `--out`.

use std::collections::HashSet;
use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use embias::analogy::{generate_analogies, read_pairs_csv, write_pairs_csv, GenerateOptions};
use embias::bias::{
    cross_embedding_report, load_word_list, project_words, projection_variance, write_cross_csv,
    write_projections_csv,
};
use embias::debias::{
    apply_transform, build_problem, debias_report, solve_sdp, write_points_csv, write_report_csv,
    write_trace_csv, write_transform, BackgroundPolicy, BuildOptions, DebiasReport, SolveOptions,
    StepPolicy,
};
use embias::eval::{
    evaluate_analogy, evaluate_similarity, load_analogy_dataset, load_similarity_dataset,
    write_results_csv, BenchmarkResult,
};
use embias::ratings::{
    aggregate_ratings, export_rating_tasks, load_rating_tasks, write_aggregate_csv, write_summary_csv,
};
use embias::{bias_direction, load_embedding, write_embedding, Embedding, Error, Format, OovPolicy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::svg::{scatter, Point};
use crate::{
    AggregateArgs, AnalogiesArgs, CompareArgs, DebiasArgs, EvalArgs, ExportTasksArgs, Input, ProjectArgs,
};

#[derive(Debug)]
pub enum Failure {
    /// Bad flags, missing inputs or out-of-range options.
    Usage(String),
    /// Unreadable or inconsistent data.
    Data(String),
    NotConverged(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::NotConverged(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "configuration error: {m}"),
            Failure::Data(m) => write!(f, "{m}"),
            Failure::NotConverged(m) => write!(f, "solver did not converge: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(m) => Failure::Usage(m),
            other => Failure::Data(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn require_file(path: &Path, flag: &str) -> Outcome {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{flag} {} does not exist", path.display())))
    }
}

fn out_dir(dir: &Path) -> Result<&Path, Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Usage(format!("cannot create output directory {}: {e}", dir.display())))?;
    Ok(dir)
}

fn create(path: PathBuf) -> Result<BufWriter<File>, Failure> {
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display())))
}

fn write_text(path: PathBuf, text: &str) -> Outcome {
    fs::write(&path, text).map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display())))
}

fn load(input: &Input, flag: &str) -> Result<Embedding, Failure> {
    load_path(&input.embedding, input.format, flag)
}

fn load_path(path: &Path, format: Format, flag: &str) -> Result<Embedding, Failure> {
    require_file(path, flag)?;
    let emb = load_embedding(path, format)?;
    log::info!("loaded {} words x {} dims from {}", emb.len(), emb.dim(), path.display());
    Ok(emb)
}

fn words(path: &Path, flag: &str) -> Result<Vec<String>, Failure> {
    require_file(path, flag)?;
    let list = load_word_list(path)?;
    if list.is_empty() {
        return Err(Failure::Usage(format!("{flag} {} lists no words", path.display())));
    }
    Ok(list)
}

fn maybe_normalize(emb: Embedding, normalize: bool) -> Result<Embedding, Failure> {
    Ok(if normalize { emb.normalize_rows()? } else { emb })
}

fn report_points(report: &DebiasReport) -> Vec<Point<'_>> {
    report
        .directions
        .iter()
        .flat_map(|d| &d.points)
        .map(|p| Point {
            x: p.before,
            y: p.after,
            group: &p.group,
            label: &p.word,
        })
        .collect()
}

fn print_report(report: &DebiasReport) {
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "n/a".into());
    for d in &report.directions {
        for g in [&d.seeds, &d.background] {
            println!(
                "{}-{}\t{}\t{}/{} words\tvariance {} -> {}",
                d.pos_anchor,
                d.neg_anchor,
                g.group,
                g.covered,
                g.requested,
                fmt(g.before),
                fmt(g.after)
            );
        }
    }
}

pub fn project(a: &ProjectArgs) -> Outcome {
    let (pos, neg) = (&a.anchors.0, &a.anchors.1);
    let emb = maybe_normalize(load(&a.input, "--embedding")?, a.normalize)?;
    let list = words(&a.words, "--words")?;
    let out = out_dir(&a.output.out)?;
    let dir = bias_direction(&emb, pos, neg)?;
    match &a.embedding2 {
        Some(path2) => {
            let emb2 = maybe_normalize(load_path(path2, a.input.format, "--embedding2")?, a.normalize)?;
            let dir2 = bias_direction(&emb2, pos, neg)?;
            let report = cross_embedding_report(&emb, &emb2, &list, &dir, &dir2);
            if report.records.is_empty() {
                return Err(Failure::Data("no listed word is in both embeddings".into()));
            }
            write_cross_csv(create(out.join("projections.csv"))?, &report)?;
            let points: Vec<Point> = report
                .records
                .iter()
                .map(|r| Point {
                    x: r.proj_a,
                    y: r.proj_b,
                    group: "words",
                    label: &r.word,
                })
                .collect();
            let title = format!("projection on {pos}-{neg}");
            write_text(
                out.join("projections.svg"),
                &scatter(&points, &title, &a.input.embedding.display().to_string(), &path2.display().to_string()),
            )?;
            println!("coverage\t{}/{}", report.coverage, report.requested);
        }
        None => {
            let records = project_words(&emb, &list, &dir, OovPolicy::Skip)?;
            if records.is_empty() {
                return Err(Failure::Data("no listed word is in the vocabulary".into()));
            }
            write_projections_csv(create(out.join("projections.csv"))?, &records)?;
            println!("coverage\t{}/{}", records.len(), list.len());
            if let Ok(v) = projection_variance(&records) {
                println!("variance\t{v}");
            }
        }
    }
    Ok(())
}

pub fn analogies(a: &AnalogiesArgs) -> Outcome {
    if !(a.delta > 0.0) {
        return Err(Failure::Usage(format!("--delta must be positive, got {}", a.delta)));
    }
    if a.top_k == 0 {
        return Err(Failure::Usage("--top-k must be at least 1".into()));
    }
    let emb = maybe_normalize(load(&a.input, "--embedding")?, a.normalize)?;
    let candidates = a.words.as_deref().map(|p| words(p, "--words")).transpose()?;
    let out = out_dir(&a.output.out)?;
    let dir = bias_direction(&emb, &a.anchors.0, &a.anchors.1)?;
    let opts = GenerateOptions {
        delta: a.delta,
        top_k: a.top_k,
        candidates,
        vocab_limit: a.vocab_limit,
    };
    let pairs = generate_analogies(&emb, &dir, &opts)?;
    write_pairs_csv(create(out.join("analogies.csv"))?, &pairs)?;
    if a.export_tasks {
        export_rating_tasks(&pairs, (&a.anchors.0, &a.anchors.1), out.join("tasks.csv"))?;
    }
    println!("pairs\t{}", pairs.len());
    Ok(())
}

pub fn export_tasks(a: &ExportTasksArgs) -> Outcome {
    require_file(&a.pairs, "--pairs")?;
    let file = File::open(&a.pairs).map_err(|e| Failure::Data(format!("{}: {e}", a.pairs.display())))?;
    let pairs = read_pairs_csv(file)?;
    let out = out_dir(&a.output.out)?;
    export_rating_tasks(&pairs, (&a.anchors.0, &a.anchors.1), out.join("tasks.csv"))?;
    println!("tasks\t{}", pairs.len());
    Ok(())
}

pub fn aggregate(a: &AggregateArgs) -> Outcome {
    require_file(&a.tasks, "--tasks")?;
    require_file(&a.responses, "--responses")?;
    let tasks = load_rating_tasks(&a.tasks)?;
    let summary = aggregate_ratings(&tasks, &a.responses)?;
    let out = out_dir(&a.output.out)?;
    write_aggregate_csv(create(out.join("aggregate.csv"))?, &summary)?;
    write_summary_csv(create(out.join("summary.csv"))?, &summary)?;
    println!("judgments\t{}", summary.n_judgments);
    println!("fraction_stereotype\t{}", summary.fraction_stereotype);
    println!("fraction_nonsensical\t{}", summary.fraction_nonsensical);
    Ok(())
}

fn sample_background(emb: &Embedding, exclude: &HashSet<&str>, n: usize, seed: u64) -> Vec<String> {
    let pool: Vec<usize> = (0..emb.len()).filter(|&i| !exclude.contains(emb.token(i))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, pool.len(), n.min(pool.len()))
        .into_iter()
        .map(|k| pool[k])
        .collect();
    picked.sort_unstable();
    picked.into_iter().map(|i| emb.token(i).to_string()).collect()
}

pub fn debias(a: &DebiasArgs) -> Outcome {
    if !(a.lambda > 0.0) || !a.lambda.is_finite() {
        return Err(Failure::Usage(format!("--lambda must be positive, got {}", a.lambda)));
    }
    if !(a.tol > 0.0) {
        return Err(Failure::Usage(format!("--tol must be positive, got {}", a.tol)));
    }
    if a.max_iters == 0 {
        return Err(Failure::Usage("--max-iters must be at least 1".into()));
    }
    let emb = load(&a.input, "--embedding")?;
    let seeds = words(&a.seeds, "--seeds")?;
    let test = a.test_words.as_deref().map(|p| words(p, "--test-words")).transpose()?;
    let explicit_background = a.background.as_deref().map(|p| words(p, "--background")).transpose()?;
    let out_format = a.out_format.unwrap_or(match a.input.format {
        Format::Auto => Format::Word2VecBinary,
        f => f,
    });
    if out_format == Format::Auto {
        return Err(Failure::Usage("--out-format cannot be auto".into()));
    }
    let out = out_dir(&a.output.out)?;

    let seeds_in: Vec<&str> = seeds.iter().map(String::as_str).filter(|w| emb.contains(w)).collect();
    if seeds_in.len() < seeds.len() {
        log::warn!("{} of {} seed words are not in the vocabulary", seeds.len() - seeds_in.len(), seeds.len());
    }
    if seeds_in.is_empty() {
        return Err(Failure::Data("no seed word is in the vocabulary; refusing a no-op transform".into()));
    }
    let background = match (&explicit_background, &test) {
        (Some(words), _) => BackgroundPolicy::Explicit(words.clone()),
        (None, Some(test)) => BackgroundPolicy::AllExcept(test.clone()),
        (None, None) => BackgroundPolicy::AllExceptSeedsAndAnchors,
    };
    let pairs: Vec<(&str, &str)> = a.anchors.iter().map(|(p, n)| (p.as_str(), n.as_str())).collect();
    let opts = BuildOptions {
        background,
        lambda: a.lambda,
        ..Default::default()
    };
    let problem = build_problem(&emb, &seeds_in, &pairs, &opts)?;
    let solve_opts = SolveOptions {
        max_iters: a.max_iters,
        tol: a.tol,
        step: if a.fixed_step { StepPolicy::Lipschitz } else { StepPolicy::BarzilaiBorwein },
    };
    let sol = solve_sdp(&problem, &solve_opts)?;
    let after = apply_transform(&emb, &sol.t)?;

    write_transform(&sol.t, out.join("transform.txt"))?;
    let ext = if out_format == Format::Word2VecBinary { "bin" } else { "txt" };
    write_embedding(&after, out.join(format!("debiased.{ext}")), out_format)?;
    write_trace_csv(create(out.join("solver_trace.csv"))?, &sol)?;

    let report_seeds: Vec<String> = match &test {
        Some(t) => t.clone(),
        None => {
            log::warn!("no --test-words given; the report measures the training seeds");
            seeds.clone()
        }
    };
    let mut exclude: HashSet<&str> = seeds.iter().map(String::as_str).collect();
    exclude.extend(report_seeds.iter().map(String::as_str));
    for (p, n) in &pairs {
        exclude.insert(p);
        exclude.insert(n);
    }
    let sample = match &explicit_background {
        Some(words) => words.iter().filter(|w| !exclude.contains(w.as_str())).take(a.sample).cloned().collect(),
        None => sample_background(&emb, &exclude, a.sample, a.seed),
    };
    let report = debias_report(&emb, &after, &pairs, &as_strs(&report_seeds), &as_strs(&sample))?;
    write_report_csv(create(out.join("report.csv"))?, &report)?;
    write_points_csv(create(out.join("points.csv"))?, &report)?;
    write_text(
        out.join("points.svg"),
        &scatter(&report_points(&report), "|projection| before and after", "before", "after"),
    )?;
    print_report(&report);
    println!(
        "solver\titerations {}\tconverged {}\tresidual_bias {:.6e}\tdistortion {:.6e}",
        sol.iterations, sol.converged, sol.residual_bias, sol.distortion
    );
    if !sol.converged {
        return Err(Failure::NotConverged(format!(
            "stopped after {} iterations (stationarity {:.3e}); artifacts written with converged=false",
            sol.iterations, sol.stationarity
        )));
    }
    Ok(())
}

fn as_strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn eval(a: &EvalArgs) -> Outcome {
    if a.similarity.is_empty() && a.analogy.is_empty() {
        return Err(Failure::Usage("give at least one --similarity or --analogy dataset".into()));
    }
    for p in &a.similarity {
        require_file(p, "--similarity")?;
    }
    for p in &a.analogy {
        require_file(p, "--analogy")?;
    }
    let mut embeddings = vec![load(&a.input, "--embedding")?];
    if let Some(p) = &a.embedding2 {
        embeddings.push(load_path(p, a.input.format, "--embedding2")?);
    }
    let labels: &[&str] = if embeddings.len() == 2 { &["before", "after"] } else { &["embedding"] };
    let similarity = a
        .similarity
        .iter()
        .map(|p| load_similarity_dataset(p, &dataset_name(p)))
        .collect::<Result<Vec<_>, _>>()?;
    let analogy = a
        .analogy
        .iter()
        .map(|p| load_analogy_dataset(p, &dataset_name(p)))
        .collect::<Result<Vec<_>, _>>()?;
    let out = out_dir(&a.output.out)?;

    let mut rows: Vec<(String, &'static str, BenchmarkResult)> = Vec::new();
    for (emb, label) in embeddings.iter().zip(labels) {
        for ds in &similarity {
            rows.push((label.to_string(), "similarity", evaluate_similarity(emb, ds)?));
        }
        for ds in &analogy {
            rows.push((label.to_string(), "analogy", evaluate_analogy(emb, ds)?));
        }
    }
    write_results_csv(create(out.join("eval.csv"))?, &rows)?;
    for (label, kind, r) in &rows {
        println!("{label}\t{}\t{kind}\t{:.4}\tcoverage {}/{}", r.name, r.metric, r.used, r.total);
    }
    Ok(())
}

pub fn compare(a: &CompareArgs) -> Outcome {
    let before = load(&a.input, "--embedding")?;
    let after = load_path(&a.embedding2, a.input.format, "--embedding2")?;
    let seeds = words(&a.seeds, "--seeds")?;
    let background = words(&a.words, "--words")?;
    let out = out_dir(&a.output.out)?;
    let pairs: Vec<(&str, &str)> = a.anchors.iter().map(|(p, n)| (p.as_str(), n.as_str())).collect();
    let report = debias_report(&before, &after, &pairs, &as_strs(&seeds), &as_strs(&background))?;
    write_report_csv(create(out.join("report.csv"))?, &report)?;
    write_points_csv(create(out.join("points.csv"))?, &report)?;
    write_text(
        out.join("points.svg"),
        &scatter(&report_points(&report), "|projection| before and after", "before", "after"),
    )?;
    print_report(&report);
    Ok(())
}
