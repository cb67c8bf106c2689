//! Step-by-step record of one pipeline run with every invariant the
//! analysis relies on, evaluated on the actual numbers.
//!
//! Each [`Check`] stores the computed value, the bound and whether the
//! relation holds, so a renderer can print them without recomputing
//! anything.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::cluster::ClusterStructure;
use crate::concentrate::{concentrate_all_observed, Transfer, TransferKind, TransferObserver};
use crate::error::Result;
use crate::model::{loads, Instance, Matrix, TOL};
use crate::pipeline::{PipelinePath, SolveOutcome};
use crate::stars::StarCase;
use crate::verify::{approx_ratio, load_factor, COST_REL_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub holds: bool,
}

impl Check {
    /// Non-strict relations get `slack`; strict ones are exact.
    pub fn new(label: String, value: f64, relation: Relation, bound: f64, slack: f64) -> Self {
        let holds = match relation {
            Relation::Le => value <= bound + slack,
            Relation::Lt => value < bound,
            Relation::Ge => value >= bound - slack,
            Relation::Gt => value > bound,
            Relation::Eq => (value - bound).abs() <= slack,
        };
        Self {
            label,
            value,
            relation,
            bound,
            holds,
        }
    }

    fn le(label: String, value: f64, bound: f64) -> Self {
        Self::new(label, value, Relation::Le, bound, TOL)
    }

    fn cost_le(label: String, value: f64, bound: f64) -> Self {
        Self::new(
            label,
            value,
            Relation::Le,
            bound,
            bound.abs() * COST_REL_TOL + TOL,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionKind {
    Clustering,
    Concentration,
    EasyCase,
    Redistribution,
    Stars,
    Guarantees,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub kind: SectionKind,
    pub title: String,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRow {
    pub core: usize,
    pub members: Vec<usize>,
    pub mass: f64,
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarRow {
    pub root: usize,
    pub children: Vec<usize>,
    pub case: StarCase,
    pub mass: f64,
    pub budget: usize,
    pub opened: Vec<usize>,
    /// `(i, r(i))`
    pub reassign: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub path: PipelinePath,
    pub alpha: f64,
    pub n: usize,
    pub budget: usize,
    pub capacity: f64,
    pub lp_cost: f64,
    pub cost: f64,
    pub centers: usize,
    pub max_load_ratio: f64,
    pub open: Vec<usize>,
    pub y_lp: Vec<f64>,
    pub conn_cost: Vec<f64>,
    pub clusters: Vec<ClusterRow>,
    pub transfers: Vec<Transfer>,
    pub y_prime: Vec<f64>,
    pub dprime: Vec<f64>,
    pub n1: Vec<usize>,
    pub n2: Vec<usize>,
    pub yhat: Option<Vec<f64>>,
    pub nearest: Option<Vec<Option<usize>>>,
    pub stars: Vec<StarRow>,
    pub isolated: Vec<usize>,
    pub sections: Vec<Section>,
}

impl Trace {
    pub fn all_hold(&self) -> bool {
        self.sections
            .iter()
            .all(|s| s.checks.iter().all(|c| c.holds))
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.sections
            .iter()
            .flat_map(|s| &s.checks)
            .filter(|c| !c.holds)
    }

    pub fn section(&self, kind: SectionKind) -> Option<&Section> {
        self.sections.iter().find(|s| s.kind == kind)
    }
}

/// Checks the three move invariants after every transfer: cluster mass is
/// unchanged, every column of `x'` still sums to 1, and the two rows touched
/// stay within capacity.
pub struct MoveAudit<'a> {
    demand: &'a [f64],
    capacity: f64,
    clusters: &'a ClusterStructure,
    pub transfers: Vec<Transfer>,
    pub checks: Vec<Check>,
}

impl<'a> MoveAudit<'a> {
    pub fn new(inst: &'a Instance, clusters: &'a ClusterStructure) -> Self {
        Self {
            demand: inst.demand(),
            capacity: inst.capacity(),
            clusters,
            transfers: Vec::new(),
            checks: Vec::new(),
        }
    }
}

impl TransferObserver for MoveAudit<'_> {
    fn after(&mut self, x: &Matrix, y: &[f64], t: &Transfer) {
        let k = self.transfers.len() + 1;
        let kind = match t.kind {
            TransferKind::Move => "move",
            TransferKind::Merge => "merge",
        };
        self.transfers.push(*t);
        if let Some(c) = self.clusters.cluster_of_core(t.core) {
            let now: f64 = c.members.iter().map(|&j| y[j]).sum();
            self.checks.push(Check::new(
                format!(
                    "(1) #{k} {kind} {}->{}: cluster {} mass",
                    t.from, t.to, t.core
                ),
                now,
                Relation::Eq,
                c.mass,
                TOL,
            ));
        }
        let drift = (0..x.cols())
            .map(|j| (x.col_sum(j) - 1.0).abs())
            .fold(0.0, f64::max);
        self.checks.push(Check::le(
            format!("(2) #{k}: max_j |Σ_i x'_ij - 1|"),
            drift,
            0.0,
        ));
        for i in [t.to, t.from] {
            let load: f64 = x.row(i).iter().zip(self.demand).map(|(v, d)| v * d).sum();
            self.checks.push(Check::le(
                format!("(3) #{k}: load of {i} vs M·y'_{i}"),
                load,
                self.capacity * y[i],
            ));
        }
    }
}

fn clustering_checks(inst: &Instance, out: &SolveOutcome) -> Vec<Check> {
    let a = out.alpha;
    let c = &out.frac.conn_cost;
    let cl = &out.clusters;
    let mut v = Vec::new();
    for cluster in &cl.clusters {
        let l = cluster.core;
        let worst = cluster
            .members
            .iter()
            .map(|&j| inst.cost(l, j) - 2.0 * a * c[j])
            .fold(f64::NEG_INFINITY, f64::max);
        v.push(Check::le(
            format!("1a core {l}: max_j c(l,j) - 2α·C_j"),
            worst,
            0.0,
        ));
    }
    let cores = cl.cores();
    for (p, &l) in cores.iter().enumerate() {
        for &m in &cores[p + 1..] {
            v.push(Check::new(
                format!("1b cores {l},{m}: c(l,l')"),
                inst.cost(l, m),
                Relation::Gt,
                2.0 * a * c[l].max(c[m]),
                0.0,
            ));
        }
    }
    for cluster in &cl.clusters {
        v.push(Check::new(
            format!("1c core {}: Z_l", cluster.core),
            cluster.mass,
            Relation::Ge,
            (a - 1.0) / a,
            TOL,
        ));
    }
    let mut seen = vec![0usize; inst.n()];
    for cluster in &cl.clusters {
        for &j in &cluster.members {
            seen[j] += 1;
        }
    }
    let once = seen.iter().filter(|&&s| s == 1).count();
    v.push(Check::new(
        "1d locations in exactly one cluster".into(),
        once as f64,
        Relation::Eq,
        inst.n() as f64,
        0.0,
    ));
    v
}

fn concentration_checks(inst: &Instance, out: &SolveOutcome) -> Vec<Check> {
    let a = out.alpha;
    let conc = &out.conc;
    let m = inst.capacity();
    let mut v = Vec::new();
    for (i, &y) in conc.y.iter().enumerate() {
        if y == 0.0 {
            continue;
        }
        v.push(Check::new(
            format!("2a y'_{i} lower"),
            y,
            Relation::Ge,
            (a - 1.0) / a,
            TOL,
        ));
        v.push(Check::new(
            format!("2a y'_{i} upper"),
            y,
            Relation::Lt,
            2.0,
            0.0,
        ));
    }
    for (i, &d) in conc.dprime.iter().enumerate() {
        v.push(Check::le(
            format!("2a d'_{i} vs M·y'_{i}"),
            d,
            m * conc.y[i],
        ));
    }
    let before: f64 = out.frac.y.iter().sum();
    let after: f64 = conc.y.iter().sum();
    v.push(Check::new(
        "2b Σ y' vs Σ y".into(),
        after,
        Relation::Eq,
        before,
        TOL,
    ));
    v.push(Check::le(
        "2b Σ y' vs k".into(),
        after,
        inst.budget() as f64,
    ));
    let n = inst.n();
    let worst = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| conc.x[(i, j)] - conc.y[i])
        .fold(f64::NEG_INFINITY, f64::max);
    v.push(Check::le("2c max_ij x'_ij - y'_i".into(), worst, 0.0));
    v
}

fn easy_checks(inst: &Instance, out: &SolveOutcome) -> Vec<Check> {
    let conc = &out.conc;
    let sol = &out.solution;
    let max_load = loads(inst.demand(), &sol.assign)
        .iter()
        .copied()
        .fold(0.0, f64::max);
    vec![
        Check::new(
            "Y = Σ_{N2} y' vs |N2| - 1".into(),
            conc.mass_n2,
            Relation::Gt,
            conc.n2.len() as f64 - 1.0,
            0.0,
        ),
        Check::le(
            "centers vs k".into(),
            sol.centers() as f64,
            inst.budget() as f64,
        ),
        Check::le("max load vs 2M".into(), max_load, 2.0 * inst.capacity()),
        Check::cost_le(
            "cost vs (3+4α)·C_LP".into(),
            sol.cost,
            (3.0 + 4.0 * out.alpha) * out.lp_cost(),
        ),
    ]
}

fn redistribution_checks(inst: &Instance, out: &SolveOutcome) -> Vec<Check> {
    let st = out.stars.as_ref().expect("full path");
    let red = &st.redistributed;
    let conc = &out.conc;
    let a = out.alpha;
    let (low, high) = ((a - 2.0) / a, (a - 1.0) / a);
    let m = inst.capacity();
    let mut v = vec![Check::le(
        "Y = Σ_{N2} y' vs |N2| - 1".into(),
        conc.mass_n2,
        conc.n2.len() as f64 - 1.0,
    )];
    let mut interior = 0usize;
    for (i, &y) in red.yhat.iter().enumerate() {
        if y == 0.0 {
            continue;
        }
        if y < 1.0 {
            v.push(Check::new(
                format!("3a ŷ_{i} lower"),
                y,
                Relation::Gt,
                low,
                0.0,
            ));
            v.push(Check::le(format!("3a ŷ_{i} upper"), y, high));
            v.push(Check::le(format!("3b d'_{i} vs M"), conc.dprime[i], m));
            if y < high - TOL {
                interior += 1;
            }
        } else {
            v.push(Check::new(
                format!("3a ŷ_{i} lower"),
                y,
                Relation::Ge,
                1.0,
                0.0,
            ));
            v.push(Check::new(
                format!("3a ŷ_{i} upper"),
                y,
                Relation::Lt,
                2.0,
                0.0,
            ));
            v.push(Check::le(
                format!("3c d'_{i} vs M·ŷ_{i}"),
                conc.dprime[i],
                m * y,
            ));
        }
    }
    v.push(Check::le(
        "3a values strictly inside ((α-2)/α, (α-1)/α)".into(),
        interior as f64,
        1.0,
    ));
    let sum_n2 = |y: &[f64]| conc.n2.iter().map(|&i| y[i]).sum::<f64>();
    v.push(Check::new(
        "3d Σ_{N2} ŷ vs Σ_{N2} y'".into(),
        sum_n2(&red.yhat),
        Relation::Eq,
        sum_n2(&conc.y),
        TOL,
    ));
    let total: f64 = red.yhat.iter().sum();
    v.push(Check::new(
        "3d Σ ŷ vs Σ y'".into(),
        total,
        Relation::Eq,
        conc.y.iter().sum(),
        TOL,
    ));
    v.push(Check::le("3d Σ ŷ vs k".into(), total, inst.budget() as f64));
    let weighted = |y: &[f64]| {
        conc.n2
            .iter()
            .map(|&i| {
                let s = red.nearest[i].expect("N2 has s(i)");
                (1.0 - y[i]) * conc.dprime[i] * inst.cost(s, i)
            })
            .sum::<f64>()
    };
    v.push(Check::cost_le(
        "3e Σ (1-ŷ)·d'·c(s(i),i) vs Σ (1-y')·d'·c(s(i),i)".into(),
        weighted(&red.yhat),
        weighted(&conc.y),
    ));
    v
}

fn star_checks(inst: &Instance, out: &SolveOutcome) -> Vec<Check> {
    let st = out.stars.as_ref().expect("full path");
    let yhat = &st.forest.yhat;
    let dprime = &out.conc.dprime;
    let mut v = Vec::new();
    let mut floor_sum = 0usize;
    for (star, r) in st.decomposition.stars.iter().zip(&st.roundings) {
        let t = star.root;
        let frac: Vec<usize> = star
            .members()
            .filter(|&i| st.forest.is_fractional(i))
            .collect();
        let mass: f64 = frac.iter().map(|&i| yhat[i]).sum();
        let q = frac.len() / 2;
        if frac.len() >= 2 {
            let bound = if frac.len().is_multiple_of(2) { q } else { q + 1 };
            v.push(Check::new(
                format!(
                    "Lemma 7 star {t}: Σ fractional ŷ ({} locations)",
                    frac.len()
                ),
                mass,
                Relation::Gt,
                bound as f64,
                0.0,
            ));
        }
        v.push(Check::le(
            format!(
                "Lemma 8 star {t} (case {}): opened vs ⌊R_t⌋",
                r.case.number()
            ),
            r.opened.len() as f64,
            r.budget as f64,
        ));
        floor_sum += r.budget;
        for &(i, to) in &r.reassign {
            let s = st.forest.nearest[i].expect("fractional location has s(i)");
            v.push(Check::le(
                format!("Lemma 10 star {t}: d'_{i}·c(r(i),i) vs 2·d'_{i}·c(s(i),i)"),
                dprime[i] * inst.cost(to, i),
                2.0 * dprime[i] * inst.cost(s, i),
            ));
        }
    }
    for &i in &st.decomposition.isolated {
        floor_sum += libm::floor(yhat[i] + TOL) as usize;
    }
    v.push(Check::le(
        "Lemma 9 centers vs Σ⌊R_t⌋ + Σ_isolated ⌊ŷ⌋".into(),
        out.solution.centers() as f64,
        floor_sum as f64,
    ));
    v.push(Check::le(
        "Lemma 9 Σ⌊R_t⌋ + Σ_isolated ⌊ŷ⌋ vs k".into(),
        floor_sum as f64,
        inst.budget() as f64,
    ));
    v
}

fn guarantee_checks(inst: &Instance, out: &SolveOutcome) -> Vec<Check> {
    let sol = &out.solution;
    let n = inst.n();
    let max_load = loads(inst.demand(), &sol.assign)
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let drift = (0..n)
        .map(|j| (sol.assign.col_sum(j) - 1.0).abs())
        .fold(0.0, f64::max);
    vec![
        Check::le(
            "centers vs k".into(),
            sol.centers() as f64,
            inst.budget() as f64,
        ),
        Check::le(
            "max load vs (2+2/α)·M".into(),
            max_load,
            load_factor(out.alpha) * inst.capacity(),
        ),
        Check::cost_le(
            "cost vs (6+10α)·C_LP".into(),
            sol.cost,
            approx_ratio(out.alpha) * out.lp_cost(),
        ),
        Check::le("max_j |Σ_i x̄_ij - 1|".into(), drift, 0.0),
    ]
}

/// Records `out` and evaluates every invariant on it. Concentration is
/// replayed from the LP optimum to audit each transfer.
pub fn build_trace(inst: &Instance, out: &SolveOutcome) -> Result<Trace> {
    let mut audit = MoveAudit::new(inst, &out.clusters);
    let replay = concentrate_all_observed(inst, &out.frac, &out.clusters, &mut audit)?;
    debug_assert_eq!(replay, out.conc);
    let MoveAudit {
        transfers,
        checks: move_checks,
        ..
    } = audit;

    let mut sections = vec![Section {
        kind: SectionKind::Clustering,
        title: "Step 1: clustering".into(),
        checks: clustering_checks(inst, out),
    }];
    let mut conc_checks = move_checks;
    conc_checks.extend(concentration_checks(inst, out));
    sections.push(Section {
        kind: SectionKind::Concentration,
        title: "Step 2: concentration".into(),
        checks: conc_checks,
    });
    if out.stars.is_some() {
        sections.push(Section {
            kind: SectionKind::Redistribution,
            title: "Step 3: redistribution".into(),
            checks: redistribution_checks(inst, out),
        });
        sections.push(Section {
            kind: SectionKind::Stars,
            title: "Step 4: stars".into(),
            checks: star_checks(inst, out),
        });
    } else {
        sections.push(Section {
            kind: SectionKind::EasyCase,
            title: "Easy case (Lemma 5)".into(),
            checks: easy_checks(inst, out),
        });
    }
    sections.push(Section {
        kind: SectionKind::Guarantees,
        title: "Guarantees".into(),
        checks: guarantee_checks(inst, out),
    });

    let clusters = out
        .clusters
        .clusters
        .iter()
        .map(|c| ClusterRow {
            core: c.core,
            members: c.members.clone(),
            mass: c.mass,
            terminal: c.is_terminal(),
        })
        .collect();
    let (yhat, nearest, stars, isolated) = match &out.stars {
        Some(st) => (
            Some(st.redistributed.yhat.clone()),
            Some(st.redistributed.nearest.clone()),
            st.decomposition
                .stars
                .iter()
                .zip(&st.roundings)
                .map(|(s, r)| StarRow {
                    root: s.root,
                    children: s.children.clone(),
                    case: r.case,
                    mass: s.mass,
                    budget: r.budget,
                    opened: r.opened.clone(),
                    reassign: r.reassign.clone(),
                })
                .collect(),
            st.decomposition.isolated.clone(),
        ),
        None => (None, None, Vec::new(), Vec::new()),
    };
    let sol = &out.solution;
    Ok(Trace {
        path: out.path,
        alpha: out.alpha,
        n: inst.n(),
        budget: inst.budget(),
        capacity: inst.capacity(),
        lp_cost: out.lp_cost(),
        cost: sol.cost,
        centers: sol.centers(),
        max_load_ratio: sol.max_load_ratio,
        open: sol.open_set(),
        y_lp: out.frac.y.clone(),
        conn_cost: out.frac.conn_cost.clone(),
        clusters,
        transfers,
        y_prime: out.conc.y.clone(),
        dprime: out.conc.dprime.clone(),
        n1: out.conc.n1.clone(),
        n2: out.conc.n2.clone(),
        yhat,
        nearest,
        stars,
        isolated,
        sections,
    })
}

/// Case label used in traces.
pub fn case_name(case: StarCase) -> &'static str {
    match case {
        StarCase::EvenHeavyRoot => "even star, root in [1, 2)",
        StarCase::EvenFractionalRoot => "even star, fractional root",
        StarCase::OddHeavyRoot => "odd star, root in [1+2/α, 2)",
        StarCase::OddLightRoot => "odd star, light root",
    }
}
