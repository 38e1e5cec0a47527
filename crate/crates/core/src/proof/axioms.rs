use crate::error::{Error, Result};
use crate::expr::{Expr, Node};
use crate::semiring::{Semiring, Weight};

use super::{format_path, AxiomId, Direction, Level, Step};

type Check<T> = std::result::Result<T, String>;

fn lhs_pattern(ax: AxiomId) -> &'static str {
    match ax {
        AxiomId::OutZero => "out(0)",
        AxiomId::OutSum => "out(r) + out(s)",
        AxiomId::PlusUnit => "zero + E",
        AxiomId::PlusComm => "E1 + E2",
        AxiomId::PlusAssoc => "(E1 + E2) + E3",
        AxiomId::ActZeroWeight => "a.(0 * E)",
        AxiomId::ActWeightSum => "a.(r * E) + a.(s * E)",
        AxiomId::Fixpoint => "mu x. E",
        AxiomId::D1 => "a.(r * (E1 + E2))",
        AxiomId::D2 => "a.(r * b.(s * E))",
        AxiomId::D3 => "a.(r * out(s))",
        AxiomId::D4 => "a.(r * zero)",
        AxiomId::ScalarDot => "a.(t * E)",
        AxiomId::Alpha => "E",
        AxiomId::TraceDist => "a.(1 * (E1 + E2))",
        AxiomId::TraceZero => "a.(1 * zero)",
    }
}

fn mismatch(ax: AxiomId, found: &Expr) -> String {
    format!("{ax} expects `{}`, found `{found}`", lhs_pattern(ax))
}

fn mul(a: &Weight, b: &Weight) -> Check<Weight> {
    a.mul(b).map_err(|e| e.to_string())
}

/// The left-to-right reading of `ax` at `sub`.
fn l2r(sub: &Expr, ax: AxiomId, s: Semiring) -> Check<Expr> {
    use Node::*;
    let bad = || mismatch(ax, sub);
    Ok(match ax {
        AxiomId::OutZero => match sub.node() {
            Out(w) if w.is_zero() => Expr::zero(),
            _ => return Err(bad()),
        },
        AxiomId::OutSum => match sub.node() {
            Plus(l, r) => match (l.node(), r.node()) {
                (Out(a), Out(b)) => Expr::out(a.add(b).map_err(|e| e.to_string())?),
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        },
        AxiomId::PlusUnit => match sub.node() {
            Plus(l, r) if l.is_zero() => r.clone(),
            _ => return Err(bad()),
        },
        AxiomId::PlusComm => match sub.node() {
            Plus(l, r) => Expr::plus(r.clone(), l.clone()),
            _ => return Err(bad()),
        },
        AxiomId::PlusAssoc => match sub.node() {
            Plus(l, r) => match l.node() {
                Plus(a, b) => Expr::plus(a.clone(), Expr::plus(b.clone(), r.clone())),
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        },
        AxiomId::ActZeroWeight => match sub.node() {
            Act(_, w, _) if w.is_zero() => Expr::zero(),
            _ => return Err(bad()),
        },
        AxiomId::ActWeightSum => match sub.node() {
            Plus(l, r) => match (l.node(), r.node()) {
                (Act(a, w1, e1), Act(b, w2, e2)) if a == b => {
                    if !e1.alpha_eq(e2) {
                        return Err(format!("{ax}: bodies `{e1}` and `{e2}` differ"));
                    }
                    Expr::act(a.clone(), w1.add(w2).map_err(|e| e.to_string())?, e1.clone())
                }
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        },
        AxiomId::Fixpoint => match sub.node() {
            Mu(x, b) => b.substitute(x, sub),
            _ => return Err(bad()),
        },
        AxiomId::D1 | AxiomId::TraceDist => match sub.node() {
            Act(a, r, b) => match b.node() {
                Plus(e1, e2) => {
                    if ax == AxiomId::TraceDist && !r.is_one() {
                        return Err(bad());
                    }
                    Expr::plus(
                        Expr::act(a.clone(), r.clone(), e1.clone()),
                        Expr::act(a.clone(), r.clone(), e2.clone()),
                    )
                }
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        },
        AxiomId::D2 => match sub.node() {
            Act(a, r, b) => match b.node() {
                Act(b2, w, e) => Expr::act(a.clone(), mul(r, w)?, Expr::act(b2.clone(), s.one(), e.clone())),
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        },
        AxiomId::D3 => match sub.node() {
            Act(a, r, b) => match b.node() {
                Out(w) => Expr::act(a.clone(), s.one(), Expr::out(mul(r, w)?)),
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        },
        AxiomId::D4 | AxiomId::TraceZero => match sub.node() {
            Act(_, r, b) if b.is_zero() && (ax == AxiomId::D4 || r.is_one()) => Expr::zero(),
            _ => return Err(bad()),
        },
        AxiomId::ScalarDot => match sub.node() {
            Act(a, t, e) => Expr::act(a.clone(), s.one(), e.scale(t).map_err(|e| e.to_string())?),
            _ => return Err(bad()),
        },
        AxiomId::Alpha => return Err("alpha needs a target (`=> EXPR`)".into()),
    })
}

/// The right-to-left reading where it is determined by the subterm alone.
fn r2l(sub: &Expr, ax: AxiomId, s: Semiring) -> Check<Expr> {
    use Node::*;
    let bad = |pat: &str| format!("{ax} R2L expects `{pat}`, found `{sub}`");
    Ok(match ax {
        AxiomId::OutZero => match sub.node() {
            Zero => Expr::out(s.zero()),
            _ => return Err(bad("zero")),
        },
        AxiomId::PlusUnit => Expr::plus(Expr::zero(), sub.clone()),
        AxiomId::PlusComm => match sub.node() {
            Plus(l, r) => Expr::plus(r.clone(), l.clone()),
            _ => return Err(bad("E2 + E1")),
        },
        AxiomId::PlusAssoc => match sub.node() {
            Plus(a, r) => match r.node() {
                Plus(b, c) => Expr::plus(Expr::plus(a.clone(), b.clone()), c.clone()),
                _ => return Err(bad("E1 + (E2 + E3)")),
            },
            _ => return Err(bad("E1 + (E2 + E3)")),
        },
        AxiomId::D1 | AxiomId::TraceDist => match sub.node() {
            Plus(l, r) => match (l.node(), r.node()) {
                (Act(a, w1, e1), Act(b, w2, e2))
                    if a == b && w1 == w2 && (ax == AxiomId::D1 || w1.is_one()) =>
                {
                    Expr::act(a.clone(), w1.clone(), Expr::plus(e1.clone(), e2.clone()))
                }
                _ => return Err(bad("a.(r * E1) + a.(r * E2)")),
            },
            _ => return Err(bad("a.(r * E1) + a.(r * E2)")),
        },
        _ => return Err(format!("{ax} R2L needs a target (`=> EXPR`)")),
    })
}

/// Whether `lhs → rhs` is a left-to-right instance of `ax`.
fn instance(ax: AxiomId, lhs: &Expr, rhs: &Expr, s: Semiring) -> Check<()> {
    match ax {
        AxiomId::Alpha => {
            if lhs.alpha_eq(rhs) {
                Ok(())
            } else {
                Err(format!("`{lhs}` and `{rhs}` are not α-equivalent"))
            }
        }
        AxiomId::ScalarDot => {
            let (Node::Act(a, t, e), Node::Act(b, u, f)) = (lhs.node(), rhs.node()) else {
                return Err(format!("scalardot relates `a.(rs * E)` and `a.(s * rE)`, got `{lhs}` and `{rhs}`"));
            };
            if a != b {
                return Err(format!("scalardot: letters `{a}` and `{b}` differ"));
            }
            let r = t
                .exact_div(u)
                .map_err(|e| e.to_string())?
                .ok_or_else(|| format!("scalardot: {u} does not divide {t}"))?;
            let scaled = e.scale(&r).map_err(|e| e.to_string())?;
            if scaled.alpha_eq(f) {
                Ok(())
            } else {
                Err(format!("scalardot: {r}·E is `{scaled}`, not `{f}`"))
            }
        }
        _ => {
            let got = l2r(lhs, ax, s)?;
            if got.alpha_eq(rhs) {
                Ok(())
            } else {
                Err(format!("{ax} rewrites `{lhs}` to `{got}`, not `{rhs}`"))
            }
        }
    }
}

fn rewrite(sub: &Expr, ax: AxiomId, dir: Direction, target: Option<&Expr>, s: Semiring) -> Check<Expr> {
    match (dir, target) {
        (Direction::L2R, None) => l2r(sub, ax, s),
        (Direction::R2L, None) => r2l(sub, ax, s),
        (Direction::L2R, Some(t)) => instance(ax, sub, t, s).map(|_| t.clone()),
        (Direction::R2L, Some(t)) => instance(ax, t, sub, s).map(|_| t.clone()),
    }
}

fn admissible(ax: AxiomId, level: Level, s: Semiring) -> Check<()> {
    if level == Level::Bisim && ax.lang_only() {
        return Err(format!("{ax} is only sound for language equivalence (level lang)"));
    }
    if ax.boolean_only() && s != Semiring::Boolean {
        return Err(format!("{ax} holds only over the boolean semiring, not {s}"));
    }
    Ok(())
}

fn apply_checked(
    e: &Expr,
    path: &[usize],
    ax: AxiomId,
    dir: Direction,
    target: Option<&Expr>,
    level: Level,
    s: Semiring,
) -> Check<Expr> {
    admissible(ax, level, s)?;
    let sub = e
        .subterm(path)
        .ok_or_else(|| format!("path {} does not exist in `{e}`", format_path(path)))?;
    let new = rewrite(sub, ax, dir, target, s)?;
    Ok(e.replace_at(path, new).expect("path exists"))
}

/// Rewrites the subterm of `e` at `path` with one axiom. Only that subterm
/// changes. With a `target` the step is checked as an axiom instance and
/// the target is used verbatim, which is how non-determined directions
/// (e.g. folding a fixpoint) are written.
pub fn apply_axiom_at(
    e: &Expr,
    path: &[usize],
    axiom: AxiomId,
    dir: Direction,
    target: Option<&Expr>,
    level: Level,
    semiring: Semiring,
) -> Result<Expr> {
    apply_checked(e, path, axiom, dir, target, level, semiring).map_err(|message| Error::Proof {
        step: format!("{axiom} {dir} at {}", format_path(path)),
        message,
    })
}

fn flatten<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match e.node() {
        Node::Plus(l, r) => {
            flatten(l, out);
            flatten(r, out);
        }
        _ => out.push(e),
    }
}

struct AcBuilder {
    cur: Expr,
    steps: Vec<(Vec<usize>, AxiomId, Direction)>,
}

impl AcBuilder {
    fn apply(&mut self, p: Vec<usize>, ax: AxiomId, dir: Direction) {
        let sub = self.cur.subterm(&p).expect("valid ac path");
        let new = match dir {
            Direction::L2R => l2r(sub, ax, Semiring::Boolean),
            Direction::R2L => r2l(sub, ax, Semiring::Boolean),
        }
        .expect("ac step applies by construction");
        self.cur = self.cur.replace_at(&p, new).expect("valid ac path");
        self.steps.push((p, ax, dir));
    }

    /// Re-associates the sum at `p` into a right comb.
    fn comb(&mut self, p: Vec<usize>) {
        let mut p = p;
        loop {
            match self.cur.subterm(&p).map(|e| e.node()) {
                Some(Node::Plus(l, _)) if matches!(l.node(), Node::Plus(..)) => {
                    self.apply(p.clone(), AxiomId::PlusAssoc, Direction::L2R);
                }
                Some(Node::Plus(..)) => p.push(1),
                _ => break,
            }
        }
    }

    /// Swaps summands `k` and `k + 1` of a right comb with `n` summands.
    fn swap(&mut self, k: usize, n: usize) {
        let p = vec![1; k];
        if k + 2 == n {
            self.apply(p, AxiomId::PlusComm, Direction::L2R);
        } else {
            self.apply(p.clone(), AxiomId::PlusAssoc, Direction::R2L);
            let mut q = p.clone();
            q.push(0);
            self.apply(q, AxiomId::PlusComm, Direction::L2R);
            self.apply(p, AxiomId::PlusAssoc, Direction::L2R);
        }
    }
}

/// Expands the `ac` macro: the commutativity and associativity steps that
/// turn the sum at `path` into `target`, provided both have the same
/// summands up to α-equivalence.
pub fn expand_ac(e: &Expr, path: &[usize], target: &Expr) -> Result<Vec<Step>> {
    let err = |message: String| Error::Proof {
        step: format!("ac at {}", format_path(path)),
        message,
    };
    let sub = e
        .subterm(path)
        .ok_or_else(|| err(format!("path does not exist in `{e}`")))?;

    let mut tgt = AcBuilder {
        cur: target.clone(),
        steps: Vec::new(),
    };
    tgt.comb(Vec::new());
    let mut src = AcBuilder {
        cur: sub.clone(),
        steps: Vec::new(),
    };
    src.comb(Vec::new());

    let mut want = Vec::new();
    flatten(&tgt.cur, &mut want);
    let want: Vec<Expr> = want.iter().map(|t| t.canonical_key()).collect();
    let n = want.len();
    for (i, key) in want.iter().enumerate() {
        let mut have = Vec::new();
        flatten(&src.cur, &mut have);
        if have.len() != n {
            return Err(err(format!("`{sub}` and `{target}` have different numbers of summands")));
        }
        let j = (i..n)
            .find(|j| have[*j].canonical_key() == *key)
            .ok_or_else(|| err(format!("no summand of `{sub}` matches `{}`", flatten_nth(&tgt.cur, i))))?;
        for k in (i..j).rev() {
            src.swap(k, n);
        }
    }
    // Undo the target's re-association.
    for (p, ax, _) in tgt.steps.iter().rev() {
        src.apply(p.clone(), *ax, Direction::R2L);
    }
    if !src.cur.alpha_eq(target) {
        return Err(err(format!("could not rearrange `{sub}` into `{target}`")));
    }
    Ok(src
        .steps
        .into_iter()
        .map(|(p, axiom, dir)| Step::Rewrite {
            path: path.iter().copied().chain(p).collect(),
            axiom,
            dir,
            target: None,
        })
        .collect())
}

fn flatten_nth(e: &Expr, i: usize) -> String {
    let mut v = Vec::new();
    flatten(e, &mut v);
    v[i].to_string()
}
