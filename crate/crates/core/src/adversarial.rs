//! Worst-case instance families behind the upper bounds on quality.
//!
//! Each generator returns the graph(s) together with the scores and worthy
//! sets predicted by closed-form expressions, so the facts can be checked
//! against a from-scratch evaluation. Set sizes must come out as exact
//! integers; generators refuse parameters that would need rounding.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{
    check_alpha, is_isomorphic, scores, with_out_weights, worthy_set, AgentId, AgentSet, Weight, WeightedDigraph,
};
use crate::io::{FactsDoc, FactsParams};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// `v` reviewed by two halves `A`, `B`; a weight-1 cycle `C`; plus the
    /// one-review manipulation `G'`.
    SmallDelta,
    /// A clique `A^k ∪ B^k` with out-weights 0 from `A^k` and 1 from `B^k`.
    LargeDeltaCase1,
    /// The same clique next to a weight-1 cycle `C`.
    LargeDeltaCase2,
    /// The complete graph split into `A` (out-weight 0) and `B` (out-weight 1).
    AppendixBipartition,
}

impl Family {
    pub const ALL: [Family; 4] =
        [Family::SmallDelta, Family::LargeDeltaCase1, Family::LargeDeltaCase2, Family::AppendixBipartition];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::SmallDelta => "small-delta",
            Family::LargeDeltaCase1 => "large-delta-1",
            Family::LargeDeltaCase2 => "large-delta-2",
            Family::AppendixBipartition => "bipartition",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Format(format!("unknown family {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceParams {
    pub n: usize,
    pub alpha: Rational,
    pub delta: Option<usize>,
    pub k: Option<usize>,
}

/// One graph of an instance plus its predicted facts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactGraph {
    pub label: String,
    pub graph: WeightedDigraph,
    pub expected_worthy: AgentSet,
    pub expected_scores: BTreeMap<AgentId, Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdversarialInstance {
    pub family: Family,
    pub params: InstanceParams,
    pub graphs: Vec<FactGraph>,
    /// Named agent groups (`v`, `A`, `B`, `C`, `a0`, ...).
    pub roles: BTreeMap<String, Vec<usize>>,
    /// Largest out-degree the family uses.
    pub max_out_degree: usize,
}

impl AdversarialInstance {
    pub fn role(&self, name: &str) -> &[usize] {
        self.roles.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Recomputes every score and worthy set from the raw graphs and compares
    /// them with the attached facts.
    pub fn verify(&self) -> Result<(), String> {
        for fg in &self.graphs {
            let actual = scores(&fg.graph);
            for (agent, expected) in &fg.expected_scores {
                if actual[agent.0] != *expected {
                    return Err(format!(
                        "{} {}: score of {agent} is {}, expected {expected}",
                        self.family, fg.label, actual[agent.0]
                    ));
                }
            }
            let worthy = worthy_set(&fg.graph, &self.params.alpha).map_err(|e| e.to_string())?;
            if worthy != fg.expected_worthy {
                return Err(format!(
                    "{} {}: worthy set {worthy}, expected {}",
                    self.family, fg.label, fg.expected_worthy
                ));
            }
            if fg.graph.max_out_degree() > self.max_out_degree {
                return Err(format!("{} {}: out-degree cap exceeded", self.family, fg.label));
            }
        }
        Ok(())
    }

    pub fn facts(&self) -> Vec<FactsDoc> {
        self.graphs
            .iter()
            .map(|fg| FactsDoc {
                family: self.family.to_string(),
                label: fg.label.clone(),
                params: FactsParams {
                    n: self.params.n,
                    alpha: self.params.alpha.clone(),
                    delta: self.params.delta,
                    k: self.params.k,
                },
                expected_worthy: fg.expected_worthy.ids(),
                expected_scores: fg.expected_scores.iter().map(|(a, s)| (a.0.to_string(), s.clone())).collect(),
            })
            .collect()
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidParameters(msg)
}

fn exact_size(value: &Rational, what: &str) -> Result<usize> {
    value.to_usize_exact().ok_or_else(|| invalid(format!("{what} = {value} is not a non-negative integer")))
}

fn cycle_edges(members: &[usize]) -> Vec<(usize, usize, Rational)> {
    let len = members.len();
    (0..len).map(|i| (members[i], members[(i + 1) % len], Rational::one())).collect()
}

fn clique_edges(a: &[usize], b: &[usize]) -> Vec<(usize, usize, Rational)> {
    let mut edges = Vec::new();
    for (members, w) in [(a, Rational::zero()), (b, Rational::one())] {
        for &src in members {
            for &dst in a.iter().chain(b) {
                if src != dst {
                    edges.push((src, dst, w.clone()));
                }
            }
        }
    }
    edges
}

fn set_of(n: usize, groups: &[&[usize]]) -> AgentSet {
    AgentSet::from_ids(n, groups.iter().flat_map(|g| g.iter().copied())).expect("ids are in range")
}

fn fill_scores(map: &mut BTreeMap<AgentId, Rational>, members: &[usize], value: &Rational) {
    for &m in members {
        map.insert(AgentId(m), value.clone());
    }
}

/// The graph pair `(G, G')` on `n` agents: `v`, halves `A` and `B` of size
/// `(1 - alpha) n / 2` reviewing `v`, and a weight-1 cycle `C` of size
/// `alpha n - 1`. `G'` differs only in the review `a0 -> v`.
pub fn small_delta_pair(n: usize, alpha: &Rational) -> Result<AdversarialInstance> {
    check_alpha(alpha)?;
    let nq = Rational::from_usize(n);
    let half = exact_size(&((Rational::one() - alpha) * &nq / Rational::from_integer(2)), "(1 - alpha) n / 2")?;
    let cycle = exact_size(&(alpha * &nq - Rational::one()), "alpha n - 1")?;
    if half == 0 {
        return Err(invalid("(1 - alpha) n / 2 must be positive".into()));
    }
    if cycle < 2 {
        return Err(invalid(format!("alpha n - 1 = {cycle}: the cycle C needs at least two agents")));
    }
    let v = 0usize;
    let a: Vec<usize> = (1..=half).collect();
    let b: Vec<usize> = (half + 1..=2 * half).collect();
    let c: Vec<usize> = (2 * half + 1..n).collect();
    let a0 = a[0];

    // (1 - alpha) n = 2 |A|
    let unit = Rational::ratio(1, 2 * half);
    let low = &unit - Rational::one();
    let build = |a_weight_of: &dyn Fn(usize) -> Rational| -> Result<WeightedDigraph> {
        let mut edges = Vec::new();
        edges.extend(a.iter().map(|&x| (x, v, a_weight_of(x))));
        edges.extend(b.iter().map(|&x| (x, v, low.clone())));
        edges.extend(cycle_edges(&c));
        WeightedDigraph::new(n, edges)
    };
    let g = build(&|_| Rational::one())?;
    let g_prime = build(&|x| if x == a0 { low.clone() } else { Rational::one() })?;

    // s(v, G) = 1 / (2 (1 - alpha) n); G' lowers it by (2 - 1/((1-alpha)n)) / ((1-alpha)n)
    let s_v = Rational::ratio(1, 4 * half);
    let drop = (Rational::from_integer(2) - &unit) * &unit;
    let s_v_prime = &s_v - drop;
    if !s_v_prime.is_negative() {
        return Err(invalid(format!("n = {n} is too small: s(v, G') = {s_v_prime} is not negative")));
    }

    let mut base_scores = BTreeMap::new();
    fill_scores(&mut base_scores, &c, &Rational::one());
    fill_scores(&mut base_scores, &a, &Rational::zero());
    fill_scores(&mut base_scores, &b, &Rational::zero());
    let mut scores_g = base_scores.clone();
    scores_g.insert(AgentId(v), s_v);
    let mut scores_g_prime = base_scores;
    scores_g_prime.insert(AgentId(v), s_v_prime);

    let worthy_g = set_of(n, &[&c, &[v]]);
    let worthy_g_prime = set_of(n, &[&a, &b, &c]);

    let mut roles = BTreeMap::new();
    roles.insert("v".to_string(), vec![v]);
    roles.insert("a0".to_string(), vec![a0]);
    roles.insert("A".to_string(), a);
    roles.insert("B".to_string(), b);
    roles.insert("C".to_string(), c);

    Ok(AdversarialInstance {
        family: Family::SmallDelta,
        params: InstanceParams { n, alpha: alpha.clone(), delta: Some(1), k: None },
        graphs: vec![
            FactGraph { label: "G".into(), graph: g, expected_worthy: worthy_g, expected_scores: scores_g },
            FactGraph {
                label: "G'".into(),
                graph: g_prime,
                expected_worthy: worthy_g_prime,
                expected_scores: scores_g_prime,
            },
        ],
        roles,
        max_out_degree: 1,
    })
}

/// `m = min(2 (1 - alpha), delta / n)`.
pub fn clique_fraction(n: usize, alpha: &Rational, delta: usize) -> Rational {
    let two_rest = Rational::from_integer(2) * (Rational::one() - alpha);
    let ratio = Rational::ratio(delta, n.max(1));
    two_rest.min(ratio)
}

struct CliqueSizes {
    a: usize,
    b: usize,
    m: Rational,
}

fn clique_sizes(n: usize, alpha: &Rational, delta: usize, k: usize) -> Result<CliqueSizes> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(invalid("n must be positive".into()));
    }
    let m = clique_fraction(n, alpha, delta);
    let clique = &m * Rational::from_usize(n);
    if clique > Rational::from_usize(n) {
        return Err(invalid(format!("m n = {clique} exceeds n = {n}")));
    }
    let half = exact_size(&(&clique / Rational::from_integer(2)), "m n / 2")?;
    if k >= half {
        return Err(invalid(format!("k = {k} leaves B^k empty (m n / 2 = {half})")));
    }
    Ok(CliqueSizes { a: half + k, b: half - k, m })
}

fn clique_scores(sizes: &CliqueSizes) -> (Rational, Rational) {
    let others = sizes.a + sizes.b - 1;
    (Rational::ratio(sizes.b, others), Rational::ratio(sizes.b - 1, others))
}

/// `G^k` for the regime `m >= 2 alpha`: a clique on `|A^k| = m n / 2 + k` and
/// `|B^k| = m n / 2 - k` agents; everyone else is isolated.
pub fn large_delta_case1(n: usize, alpha: &Rational, delta: usize, k: usize) -> Result<AdversarialInstance> {
    let sizes = clique_sizes(n, alpha, delta, k)?;
    if sizes.m < Rational::from_integer(2) * alpha {
        return Err(invalid(format!("case I needs m >= 2 alpha, but m = {}", sizes.m)));
    }
    let a: Vec<usize> = (0..sizes.a).collect();
    let b: Vec<usize> = (sizes.a..sizes.a + sizes.b).collect();
    let rest: Vec<usize> = (sizes.a + sizes.b..n).collect();
    let graph = WeightedDigraph::new(n, clique_edges(&a, &b))?;

    let (s_a, s_b) = clique_scores(&sizes);
    let mut expected_scores = BTreeMap::new();
    fill_scores(&mut expected_scores, &a, &s_a);
    fill_scores(&mut expected_scores, &b, &s_b);
    fill_scores(&mut expected_scores, &rest, &Rational::zero());
    let expected_worthy = set_of(n, &[&a]);

    let mut roles = BTreeMap::new();
    roles.insert("A".to_string(), a);
    roles.insert("B".to_string(), b);
    roles.insert("rest".to_string(), rest);
    Ok(AdversarialInstance {
        family: Family::LargeDeltaCase1,
        params: InstanceParams { n, alpha: alpha.clone(), delta: Some(delta), k: Some(k) },
        graphs: vec![FactGraph { label: format!("G^{k}"), graph, expected_worthy, expected_scores }],
        roles,
        max_out_degree: sizes.a + sizes.b - 1,
    })
}

/// `G^k` for the regime `m < 2 alpha`: the clique plus a weight-1 cycle `C` of
/// size `(alpha - m/2) n`, so that `s(c) = 1 > s(a) > s(b)`.
pub fn large_delta_case2(n: usize, alpha: &Rational, delta: usize, k: usize) -> Result<AdversarialInstance> {
    let sizes = clique_sizes(n, alpha, delta, k)?;
    let two = Rational::from_integer(2);
    if sizes.m >= &two * alpha {
        return Err(invalid(format!("case II needs m < 2 alpha, but m = {}", sizes.m)));
    }
    let cycle = exact_size(&((alpha - &sizes.m / &two) * Rational::from_usize(n)), "(alpha - m/2) n")?;
    if cycle < 2 {
        return Err(invalid(format!("(alpha - m/2) n = {cycle}: the cycle C needs at least two agents")));
    }
    if sizes.a < 2 {
        return Err(invalid("|A| must be at least 2 so that s(a) < 1 = s(c)".into()));
    }
    let a: Vec<usize> = (0..sizes.a).collect();
    let b: Vec<usize> = (sizes.a..sizes.a + sizes.b).collect();
    let c: Vec<usize> = (sizes.a + sizes.b..sizes.a + sizes.b + cycle).collect();
    let rest: Vec<usize> = (sizes.a + sizes.b + cycle..n).collect();
    let mut edges = clique_edges(&a, &b);
    edges.extend(cycle_edges(&c));
    let graph = WeightedDigraph::new(n, edges)?;

    let (s_a, s_b) = clique_scores(&sizes);
    let mut expected_scores = BTreeMap::new();
    fill_scores(&mut expected_scores, &a, &s_a);
    fill_scores(&mut expected_scores, &b, &s_b);
    fill_scores(&mut expected_scores, &c, &Rational::one());
    fill_scores(&mut expected_scores, &rest, &Rational::zero());
    let expected_worthy = set_of(n, &[&a, &c]);

    let mut roles = BTreeMap::new();
    roles.insert("A".to_string(), a);
    roles.insert("B".to_string(), b);
    roles.insert("C".to_string(), c);
    roles.insert("rest".to_string(), rest);
    Ok(AdversarialInstance {
        family: Family::LargeDeltaCase2,
        params: InstanceParams { n, alpha: alpha.clone(), delta: Some(delta), k: Some(k) },
        graphs: vec![FactGraph { label: format!("G^{k}"), graph, expected_worthy, expected_scores }],
        roles,
        max_out_degree: sizes.a + sizes.b - 1,
    })
}

/// The complete graph with `|A| = alpha n` agents reviewing 0 and the other
/// `(1 - alpha) n` reviewing 1.
pub fn appendix_bipartition(n: usize, alpha: &Rational) -> Result<AdversarialInstance> {
    check_alpha(alpha)?;
    let size_a = exact_size(&(alpha * Rational::from_usize(n)), "alpha n")?;
    if size_a == 0 || size_a >= n {
        return Err(invalid("both alpha n and (1 - alpha) n must be positive".into()));
    }
    let a: Vec<usize> = (0..size_a).collect();
    let b: Vec<usize> = (size_a..n).collect();
    let graph = WeightedDigraph::new(n, clique_edges(&a, &b))?;
    let sizes = CliqueSizes { a: a.len(), b: b.len(), m: Rational::one() };
    let (s_a, s_b) = clique_scores(&sizes);
    let mut expected_scores = BTreeMap::new();
    fill_scores(&mut expected_scores, &a, &s_a);
    fill_scores(&mut expected_scores, &b, &s_b);
    let expected_worthy = set_of(n, &[&a]);
    let mut roles = BTreeMap::new();
    roles.insert("A".to_string(), a);
    roles.insert("B".to_string(), b);
    Ok(AdversarialInstance {
        family: Family::AppendixBipartition,
        params: InstanceParams { n, alpha: alpha.clone(), delta: Some(n - 1), k: None },
        graphs: vec![FactGraph { label: "G".into(), graph, expected_worthy, expected_scores }],
        roles,
        max_out_degree: n - 1,
    })
}

/// Builds one family member from loosely specified parameters.
pub fn generate(family: Family, n: usize, alpha: &Rational, delta: Option<usize>, k: usize) -> Result<AdversarialInstance> {
    let need_delta = || delta.ok_or_else(|| invalid(format!("family {family} needs delta")));
    match family {
        Family::SmallDelta => small_delta_pair(n, alpha),
        Family::LargeDeltaCase1 => large_delta_case1(n, alpha, need_delta()?, k),
        Family::LargeDeltaCase2 => large_delta_case2(n, alpha, need_delta()?, k),
        Family::AppendixBipartition => appendix_bipartition(n, alpha),
    }
}

/// Every family member that exists at `(n, alpha)` and fits the cap `delta`
/// (clique families for `k` in `0..=1`).
pub fn applicable_instances(n: usize, alpha: &Rational, delta: usize) -> Vec<AdversarialInstance> {
    let mut out = Vec::new();
    out.extend(small_delta_pair(n, alpha));
    for k in 0..=1 {
        out.extend(large_delta_case1(n, alpha, delta, k));
        out.extend(large_delta_case2(n, alpha, delta, k));
    }
    out.extend(appendix_bipartition(n, alpha));
    out.retain(|inst| inst.max_out_degree <= delta);
    out
}

/// Nullifies the reviews of one `B^k` agent in case-I `G^k` and checks that the
/// result is isomorphic to `G^{k+1}`.
pub fn case1_chain_step_holds(n: usize, alpha: &Rational, delta: usize, k: usize) -> Result<bool> {
    let current = large_delta_case1(n, alpha, delta, k)?;
    let next = large_delta_case1(n, alpha, delta, k + 1)?;
    let b = AgentId(current.role("B")[0]);
    let nullified = with_out_weights(&current.graphs[0].graph, &[b], &Weight::zero())?;
    is_isomorphic(&nullified, &next.graphs[0].graph)
}
