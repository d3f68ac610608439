use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use ust_core::builders::{build_random_graph, farthest_point_clustering, PointCloud};
use ust_core::graph::{validate_root, PhysicalGraph, DEFAULT_TIE_TOL};
use ust_core::io;
use ust_core::oracle::{et_lambda, wasserstein, EptParams};
use ust_core::par::{self, Execution};
use ust_core::{
    kernel, sample_roots, shortest_path_tree, DiscreteMeasure, EdgeWeights, Order, RootSet, SlicedUst, TreeOptions,
    UstEvaluator, UstParams,
};

use crate::{
    BenchArgs, BuildGraphArgs, Cli, Command, DistArgs, Failure, Format, GramArgs, InputArgs, OracleArgs, OracleKind,
    ParamArgs, RootArgs, ValidateArgs,
};

type Res<T> = Result<T, Failure>;

pub fn run(cli: Cli) -> Res<()> {
    match cli.command {
        Command::Dist(a) => dist(a),
        Command::Gram(a) => gram(a),
        Command::Bench(a) => bench(a),
        Command::Validate(a) => validate(a),
        Command::BuildGraph(a) => build_graph(a),
        Command::Oracle(a) => oracle(a),
    }
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::input("Io", format!("{}: {e}", path.display())))
}

fn write(out: Option<&Path>, text: &str) -> Res<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::input("Io", format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(input: &InputArgs) -> Res<(PhysicalGraph, Vec<DiscreteMeasure>)> {
    let g = io::parse_graph(&read(&input.graph)?)?;
    let ms = io::parse_measures(&read(&input.measures)?)?.measures;
    if ms.is_empty() {
        return Err(Failure::input("NoMeasures", "measures file lists no measures"));
    }
    for m in &ms {
        m.check_support(g.node_count())?;
    }
    Ok((g, ms))
}

fn params(a: &ParamArgs, g: &PhysicalGraph) -> Res<UstParams> {
    let omega = if a.omega == "length" {
        EdgeWeights::Length
    } else {
        let w = io::parse_edge_weights(&read(Path::new(&a.omega))?)?;
        if w.len() != g.edge_count() {
            return Err(Failure::input(
                "OmegaLength",
                format!("omega file has {} values for {} edges", w.len(), g.edge_count()),
            ));
        }
        EdgeWeights::PerEdge(w)
    };
    let p = UstParams {
        p: Order::new(a.p)?,
        b: a.b,
        lambda: a.lambda,
        alpha: a.alpha,
        w1_root: a.w1_root,
        w2_root: a.w2_root,
        omega,
    };
    p.validate()?;
    Ok(p)
}

fn roots(a: &RootArgs, g: &PhysicalGraph) -> Res<RootSet> {
    if let Some(r) = a.root {
        return Ok(RootSet::single(r));
    }
    let set = sample_roots(g, a.slices, a.seed, DEFAULT_TIE_TOL)?;
    if set.short {
        eprintln!(
            "{}",
            json!({"warning": "ShortRootSet", "requested": a.slices, "roots": set.roots.len()})
        );
    }
    Ok(set)
}

fn matrix_text(m: &[Vec<f64>], format: Format) -> String {
    match format {
        Format::Csv => io::matrix_to_csv(m),
        Format::Json => io::matrix_to_json(m) + "\n",
    }
}

fn distance_matrix(input: &InputArgs, p: &ParamArgs, r: &RootArgs) -> Res<Vec<Vec<f64>>> {
    let (g, ms) = load(input)?;
    let params = params(p, &g)?;
    let set = roots(r, &g)?;
    let sliced = SlicedUst::new(&g, &set, &params, TreeOptions::default())?;
    Ok(sliced.pairwise_matrix(&ms)?)
}

fn dist(a: DistArgs) -> Res<()> {
    let m = distance_matrix(&a.input, &a.params, &a.roots)?;
    write(a.output.out.as_deref(), &matrix_text(&m, a.output.format))
}

fn gram(a: GramArgs) -> Res<()> {
    let d = distance_matrix(&a.input, &a.params, &a.roots)?;
    let k = kernel::gram(&d, a.t)?;
    write(a.output.out.as_deref(), &matrix_text(&k.values, a.output.format))
}

fn validate(a: ValidateArgs) -> Res<()> {
    let g = io::parse_graph(&read(&a.graph)?)?;
    let reports = par::try_map_indices(Execution::default(), g.node_count(), |v| {
        validate_root(&g, v, a.tie_tol)
    })?;
    let text = match a.output.format {
        Format::Csv => {
            let mut s = String::from("node,unique,tied_count\n");
            for r in &reports {
                s.push_str(&format!("{},{},{}\n", r.root, r.ok, r.tied.len()));
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = reports
                .iter()
                .map(|r| json!({"node": r.root, "unique": r.ok, "tied": r.tied}))
                .collect();
            Value::Array(rows).to_string() + "\n"
        }
    };
    write(a.output.out.as_deref(), &text)
}

fn build_graph(a: BuildGraphArgs) -> Res<()> {
    let pc = match &a.points {
        Some(p) => io::parse_points(&read(p)?)?,
        None => PointCloud::uniform(a.m, 2, a.seed),
    };
    if a.m == 0 {
        return Err(Failure::input("InvalidCount", "--m must be at least 1"));
    }
    let clusters = farthest_point_clustering(&pc, a.m, a.seed)?;
    let g = build_random_graph(&clusters.centroids, a.density, a.seed)?;
    if let Some(path) = &a.assignment {
        let text: String = clusters.assignment.iter().map(|c| format!("{c}\n")).collect();
        write(Some(path), &text)?;
    }
    write(a.out.as_deref(), &io::write_graph(&g))
}

fn oracle(a: OracleArgs) -> Res<()> {
    let (g, ms) = load(&a.input)?;
    let pick = |k: usize| {
        ms.get(k).ok_or_else(|| {
            Failure::input(
                "MeasureIndex",
                format!("measure index {k} out of range ({} measures)", ms.len()),
            )
        })
    };
    let (mu, nu) = (pick(a.i)?, pick(a.j)?);
    let res = match a.kind {
        OracleKind::Wasserstein => wasserstein(&g, a.params.p, mu, nu)?,
        OracleKind::Et => {
            let params = params(&a.params, &g)?;
            let root = match a.root {
                Some(r) => r,
                None => sample_roots(&g, 1, a.seed, DEFAULT_TIE_TOL)?.roots[0],
            };
            let ept = EptParams::from_ust(&params, root, a.a1.unwrap_or(params.b));
            et_lambda(&g, ept, mu, nu)?
        }
    };
    let text = json!({"value": res.value, "plan_mass": res.plan_mass, "dual_gap": res.dual_gap}).to_string() + "\n";
    write(a.out.as_deref(), &text)
}

struct Row {
    metric: &'static str,
    i: Option<usize>,
    j: Option<usize>,
    touched: Option<usize>,
    value: f64,
}

fn opt(x: Option<usize>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

/// Median seconds per call, repeating until about 2 ms have been spent.
fn time_call(mut f: impl FnMut()) -> f64 {
    let mut samples = Vec::new();
    let budget = Instant::now();
    while samples.len() < 5 || (budget.elapsed().as_secs_f64() < 2e-3 && samples.len() < 1000) {
        let t = Instant::now();
        f();
        samples.push(t.elapsed().as_secs_f64());
    }
    samples.sort_by(f64::total_cmp);
    samples[samples.len() / 2]
}

fn touched_union(eval: &UstEvaluator<'_>, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Res<usize> {
    let (a, b) = (eval.profile(mu)?, eval.profile(nu)?);
    let (x, y) = (a.entries(), b.entries());
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < x.len() || j < y.len() {
        match (x.get(i), y.get(j)) {
            (Some(p), Some(q)) if p.0 == q.0 => {
                i += 1;
                j += 1;
            }
            (Some(p), Some(q)) if p.0 < q.0 => i += 1,
            (Some(_), None) => i += 1,
            _ => j += 1,
        }
        n += 1;
    }
    Ok(n)
}

/// Least-squares slope and coefficient of determination of `y` against `x`.
fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return (0.0, 1.0);
    }
    (sxy / sxx, sxy * sxy / (sxx * syy))
}

fn bench(a: BenchArgs) -> Res<()> {
    let (g, ms) = load(&a.input)?;
    let params = params(&a.params, &g)?;
    let set = roots(&a.roots, &g)?;
    let mut rows = Vec::new();

    for &r in &set.roots {
        let t = Instant::now();
        let pre = shortest_path_tree(&g, r, TreeOptions::default())?;
        rows.push(Row {
            metric: "preprocess_ms",
            i: Some(r),
            j: None,
            touched: Some(pre.tree_edges().len()),
            value: t.elapsed().as_secs_f64() * 1e3,
        });
    }
    let sliced = SlicedUst::with_execution(&g, &set, &params, TreeOptions::default(), Execution::Sequential)?;
    let evals: Vec<UstEvaluator<'_>> = sliced
        .preprocesses()
        .iter()
        .map(|pre| UstEvaluator::new(pre, &params))
        .collect::<Result<_, _>>()?;

    let pairs: Vec<(usize, usize)> = (0..ms.len())
        .flat_map(|i| (i + 1..ms.len()).map(move |j| (i, j)))
        .take(a.max_pairs)
        .collect();
    for &(i, j) in &pairs {
        let touched = evals
            .iter()
            .map(|e| touched_union(e, &ms[i], &ms[j]))
            .sum::<Res<usize>>()?;
        let secs = time_call(|| {
            std::hint::black_box(sliced.distance(&ms[i], &ms[j]).unwrap());
        });
        rows.push(Row {
            metric: "per_pair_us",
            i: Some(i),
            j: Some(j),
            touched: Some(touched),
            value: secs * 1e6,
        });
        if a.oracle {
            let ept = EptParams::from_ust(&params, set.roots[0], params.b);
            let t = Instant::now();
            et_lambda(&g, ept, &ms[i], &ms[j])?;
            rows.push(Row {
                metric: "oracle_ms",
                i: Some(i),
                j: Some(j),
                touched: None,
                value: t.elapsed().as_secs_f64() * 1e3,
            });
        }
    }

    if a.sweep >= 2 {
        let eval = &evals[0];
        let n = g.node_count();
        // Supports near n saturate the tree and flatten the touched-edge axis.
        let cap = (n / 4).clamp(1, 4096);
        let mut rng = ChaCha8Rng::seed_from_u64(a.roots.seed);
        let mut pts = Vec::new();
        for k in 0..a.sweep {
            let size = ((cap as f64).powf(k as f64 / (a.sweep - 1) as f64).round() as usize).clamp(1, cap);
            let mut draw = || {
                let nodes = rand::seq::index::sample(&mut rng, n, size).into_vec();
                DiscreteMeasure::new(nodes.into_iter().map(|v| (v, rng.random_range(0.1..1.0))))
            };
            let (mu, nu) = (draw()?, draw()?);
            let touched = touched_union(eval, &mu, &nu)?;
            let secs = time_call(|| {
                std::hint::black_box(eval.distance(&mu, &nu).unwrap());
            });
            pts.push((touched as f64, secs * 1e6));
            rows.push(Row {
                metric: "sweep_us",
                i: Some(size),
                j: None,
                touched: Some(touched),
                value: secs * 1e6,
            });
        }
        let (slope, r2) = linear_fit(&pts);
        rows.push(Row {
            metric: "sweep_slope_us_per_edge",
            i: None,
            j: None,
            touched: None,
            value: slope,
        });
        rows.push(Row {
            metric: "sweep_r2",
            i: None,
            j: None,
            touched: None,
            value: r2,
        });
    }

    let text = match a.output.format {
        Format::Csv => {
            let mut s = String::from("metric,i,j,touched_edges,value\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.metric,
                    opt(r.i),
                    opt(r.j),
                    opt(r.touched),
                    r.value
                ));
            }
            s
        }
        Format::Json => {
            let v: Vec<Value> = rows
                .iter()
                .map(|r| json!({"metric": r.metric, "i": r.i, "j": r.j, "touched_edges": r.touched, "value": r.value}))
                .collect();
            Value::Array(v).to_string() + "\n"
        }
    };
    write(a.output.out.as_deref(), &text)
}
