//! Weighted automata: a finite state set with an output weight per state and,
//! per letter, a linear combination of successor states.
//!
//! Evaluation runs on [`Configuration`]s (linear combinations of states), i.e.
//! on the determinized automaton obtained by extending the transition
//! structure linearly. Over the Boolean semiring that determinization is the
//! classical subset construction, exposed as [`WeightedAutomaton::subset_construct`].

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lincomb::{parse_lincomb, LinComb};
use crate::semiring::{Semiring, Weight};

/// A vector over the states of an automaton, keyed by state index.
pub type Configuration = LinComb<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedAutomaton {
    semiring: Semiring,
    alphabet: Vec<String>,
    states: Vec<String>,
    state_index: HashMap<String, usize>,
    output: Vec<Weight>,
    /// `trans[state][letter]`
    trans: Vec<Vec<LinComb<usize>>>,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name
            .chars()
            .any(|c| c.is_whitespace() || "#{}:,".contains(c))
}

impl WeightedAutomaton {
    pub fn new(semiring: Semiring, alphabet: Vec<String>) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::AlphabetMismatch("alphabet must be nonempty".into()));
        }
        let mut seen = BTreeSet::new();
        for a in &alphabet {
            if !valid_name(a) || !seen.insert(a.as_str()) {
                return Err(Error::AlphabetMismatch(format!("bad or repeated letter `{a}`")));
            }
        }
        Ok(WeightedAutomaton {
            semiring,
            alphabet,
            states: Vec::new(),
            state_index: HashMap::new(),
            output: Vec::new(),
            trans: Vec::new(),
        })
    }

    pub fn add_state(&mut self, name: impl Into<String>, output: Weight) -> Result<usize> {
        let name = name.into();
        if !valid_name(&name) {
            return Err(Error::syntax(0, 0, format!("bad state name `{name}`")));
        }
        if self.state_index.contains_key(&name) {
            return Err(Error::DuplicateState(name));
        }
        if output.semiring() != self.semiring {
            return Err(Error::DomainMismatch {
                left: self.semiring,
                right: output.semiring(),
            });
        }
        let id = self.states.len();
        self.state_index.insert(name.clone(), id);
        self.states.push(name);
        self.output.push(output);
        self.trans
            .push(vec![LinComb::zero(self.semiring); self.alphabet.len()]);
        Ok(id)
    }

    /// Adds `weight` to the edge `src --letter--> dst`; repeated edges sum.
    pub fn add_transition(&mut self, src: usize, letter: usize, weight: Weight, dst: usize) -> Result<()> {
        if src >= self.states.len() {
            return Err(Error::UndeclaredState(format!("#{src}")));
        }
        if dst >= self.states.len() {
            return Err(Error::UndeclaredState(format!("#{dst}")));
        }
        if letter >= self.alphabet.len() {
            return Err(Error::UnknownLetter(format!("#{letter}")));
        }
        self.trans[src][letter].add_term(dst, weight)
    }

    pub fn add_transition_named(&mut self, src: &str, letter: &str, weight: Weight, dst: &str) -> Result<()> {
        let s = self.state_id(src)?;
        let d = self.state_id(dst)?;
        let a = self.letter_index(letter)?;
        self.add_transition(s, a, weight, d)
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, id: usize) -> &str {
        &self.states[id]
    }

    pub fn state_id(&self, name: &str) -> Result<usize> {
        self.state_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UndeclaredState(name.to_string()))
    }

    pub fn letter_index(&self, letter: &str) -> Result<usize> {
        self.alphabet
            .iter()
            .position(|a| a == letter)
            .ok_or_else(|| Error::UnknownLetter(letter.to_string()))
    }

    pub fn output(&self, state: usize) -> &Weight {
        &self.output[state]
    }

    pub fn transition(&self, state: usize, letter: usize) -> &LinComb<usize> {
        &self.trans[state][letter]
    }

    /// The unit configuration `{state:1}`.
    pub fn unit(&self, state: usize) -> Configuration {
        LinComb::unit(self.semiring, state)
    }

    pub fn parse_configuration(&self, text: &str) -> Result<Configuration> {
        let named = parse_lincomb(text, self.semiring)?;
        let mut cfg = LinComb::zero(self.semiring);
        for (name, w) in named {
            cfg.add_term(self.state_id(&name)?, w)?;
        }
        Ok(cfg)
    }

    /// Text form of a configuration, keys sorted by state name.
    pub fn format_configuration(&self, cfg: &Configuration) -> String {
        cfg.map_keys(|s| self.states[*s].clone()).to_string()
    }

    pub(crate) fn check_config(&self, cfg: &Configuration) -> Result<()> {
        if cfg.semiring() != self.semiring {
            return Err(Error::DomainMismatch {
                left: self.semiring,
                right: cfg.semiring(),
            });
        }
        match cfg.keys().find(|s| **s >= self.states.len()) {
            Some(s) => Err(Error::UndeclaredState(format!("#{s}"))),
            None => Ok(()),
        }
    }

    /// One transition of the determinized automaton.
    pub fn step(&self, cfg: &Configuration, letter: &str) -> Result<Configuration> {
        self.check_config(cfg)?;
        let a = self.letter_index(letter)?;
        Ok(self.step_index(cfg, a))
    }

    pub(crate) fn step_index(&self, cfg: &Configuration, letter: usize) -> Configuration {
        let mut out = LinComb::zero(self.semiring);
        for (s, w) in cfg {
            out.add_scaled(w, &self.trans[*s][letter])
                .expect("configuration checked against automaton");
        }
        out
    }

    /// `Σ cfg(s)·output(s)`.
    pub fn output_of(&self, cfg: &Configuration) -> Weight {
        cfg.dot(|s| self.output[*s].clone())
    }

    /// The weight the configuration assigns to `word`.
    pub fn eval_word<S: AsRef<str>>(&self, start: &Configuration, word: &[S]) -> Result<Weight> {
        self.check_config(start)?;
        let letters = word
            .iter()
            .map(|a| self.letter_index(a.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        let mut cfg = start.clone();
        for a in letters {
            if cfg.is_zero() {
                return Ok(self.semiring.zero());
            }
            cfg = self.step_index(&cfg, a);
        }
        Ok(self.output_of(&cfg))
    }

    /// Classical powerset construction for a Boolean automaton: the reachable
    /// Boolean configurations become DFA states. State 0 of the result is the
    /// start set.
    pub fn subset_construct(&self, start: &Configuration) -> Result<Dfa> {
        if self.semiring != Semiring::Boolean {
            return Err(Error::Capability {
                required: "the boolean semiring".into(),
                actual: self.semiring,
            });
        }
        self.check_config(start)?;
        let init: BTreeSet<usize> = start.keys().copied().collect();
        let mut index: HashMap<BTreeSet<usize>, usize> = HashMap::new();
        let mut subsets = vec![init.clone()];
        let mut delta: Vec<Vec<usize>> = Vec::new();
        index.insert(init, 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let mut row = Vec::with_capacity(self.alphabet.len());
            for a in 0..self.alphabet.len() {
                let next: BTreeSet<usize> = subsets[i]
                    .iter()
                    .flat_map(|s| self.trans[*s][a].keys().copied())
                    .collect();
                let j = match index.get(&next) {
                    Some(j) => *j,
                    None => {
                        let j = subsets.len();
                        index.insert(next.clone(), j);
                        subsets.push(next);
                        queue.push_back(j);
                        j
                    }
                };
                row.push(j);
            }
            if delta.len() <= i {
                delta.resize(i + 1, Vec::new());
            }
            delta[i] = row;
        }
        let accepting = subsets
            .iter()
            .map(|set| set.iter().any(|s| !self.output[*s].is_zero()))
            .collect();
        Ok(Dfa {
            alphabet: self.alphabet.clone(),
            subsets,
            accepting,
            delta,
        })
    }

    /// Serializes to the line-based text format. Parsing the result gives
    /// back an equal automaton.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "semiring {}", self.semiring);
        let _ = writeln!(out, "alphabet {}", self.alphabet.join(" "));
        for (i, name) in self.states.iter().enumerate() {
            let _ = writeln!(out, "state {name} output {}", self.output[i]);
        }
        for (i, src) in self.states.iter().enumerate() {
            for (a, letter) in self.alphabet.iter().enumerate() {
                for (dst, w) in &self.trans[i][a] {
                    let _ = writeln!(out, "trans {src} {letter} {w} {}", self.states[*dst]);
                }
            }
        }
        out
    }

    /// GraphViz rendering: node labels show outputs, edges are labelled
    /// `letter,weight`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph automaton {\n  rankdir=LR;\n");
        for (i, name) in self.states.iter().enumerate() {
            let shape = if self.output[i].is_zero() {
                "circle"
            } else {
                "doublecircle"
            };
            let _ = writeln!(
                out,
                "  \"{name}\" [shape={shape}, label=\"{name}\\n{}\"];",
                self.output[i]
            );
        }
        for (i, src) in self.states.iter().enumerate() {
            for (a, letter) in self.alphabet.iter().enumerate() {
                for (dst, w) in &self.trans[i][a] {
                    let _ = writeln!(
                        out,
                        "  \"{src}\" -> \"{}\" [label=\"{letter},{w}\"];",
                        self.states[*dst]
                    );
                }
            }
        }
        out.push_str("}\n");
        out
    }

    /// Parses the line-based automaton format:
    ///
    /// ```text
    /// semiring integers
    /// alphabet a b c d
    /// state s0 output 0
    /// state s1 output 1
    /// trans s0 a 2 s1
    /// ```
    ///
    /// `#` starts a comment. Transitions may mention states declared later;
    /// repeated `trans` lines for the same edge are summed.
    pub fn parse(text: &str) -> Result<Self> {
        let mut semiring: Option<Semiring> = None;
        let mut aut: Option<WeightedAutomaton> = None;
        let mut pending: Vec<(usize, Vec<(usize, String)>)> = Vec::new();

        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.split('#').next().unwrap_or("");
            let tokens = tokenize(line);
            let Some(&(col, head)) = tokens.first() else {
                continue;
            };
            let args = &tokens[1..];
            let need = |n: usize, usage: &str| -> Result<()> {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(Error::syntax(line_no, col, format!("expected `{usage}`")))
                }
            };
            match head {
                "semiring" => {
                    need(1, "semiring NAME")?;
                    if semiring.is_some() {
                        return Err(Error::syntax(line_no, col, "semiring declared twice"));
                    }
                    semiring = Some(args[0].1.parse().map_err(|e: Error| {
                        Error::syntax(line_no, args[0].0, e.to_string())
                    })?);
                }
                "alphabet" => {
                    let s = semiring
                        .ok_or_else(|| Error::syntax(line_no, col, "`semiring` must come first"))?;
                    if aut.is_some() {
                        return Err(Error::syntax(line_no, col, "alphabet declared twice"));
                    }
                    let letters = args.iter().map(|(_, t)| t.to_string()).collect();
                    aut = Some(
                        WeightedAutomaton::new(s, letters)
                            .map_err(|e| Error::syntax(line_no, col, e.to_string()))?,
                    );
                }
                "state" => {
                    need(3, "state NAME output WEIGHT")?;
                    let a = aut
                        .as_mut()
                        .ok_or_else(|| Error::syntax(line_no, col, "`alphabet` must precede states"))?;
                    if args[1].1 != "output" {
                        return Err(Error::syntax(line_no, args[1].0, "expected `output`"));
                    }
                    let w = a
                        .semiring
                        .parse_weight(args[2].1)
                        .map_err(|e| Error::syntax(line_no, args[2].0, e.to_string()))?;
                    a.add_state(args[0].1, w).map_err(|e| match e {
                        Error::DuplicateState(_) => e,
                        other => Error::syntax(line_no, args[0].0, other.to_string()),
                    })?;
                }
                "trans" => {
                    need(4, "trans SRC LETTER WEIGHT DST")?;
                    if aut.is_none() {
                        return Err(Error::syntax(line_no, col, "`alphabet` must precede transitions"));
                    }
                    pending.push((
                        line_no,
                        args.iter().map(|(c, t)| (*c, t.to_string())).collect(),
                    ));
                }
                other => {
                    return Err(Error::syntax(line_no, col, format!("unknown directive `{other}`")));
                }
            }
        }

        let mut aut = aut.ok_or_else(|| Error::syntax(1, 1, "missing `semiring`/`alphabet` header"))?;
        for (line_no, args) in pending {
            let src = aut.state_id(&args[0].1)?;
            let letter = aut
                .letter_index(&args[1].1)
                .map_err(|e| Error::syntax(line_no, args[1].0, e.to_string()))?;
            let w = aut
                .semiring
                .parse_weight(&args[2].1)
                .map_err(|e| Error::syntax(line_no, args[2].0, e.to_string()))?;
            let dst = aut.state_id(&args[3].1)?;
            aut.add_transition(src, letter, w, dst)?;
        }
        Ok(aut)
    }
}

fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

/// Splits a word into letters. Whitespace- or comma-separated input is split
/// on the separators; otherwise letters are matched greedily (longest first)
/// against the alphabet. The empty string (or `ε`) is the empty word.
pub fn parse_word(text: &str, alphabet: &[String]) -> Result<Vec<String>> {
    let text = text.trim();
    if text.is_empty() || text == "ε" {
        return Ok(Vec::new());
    }
    let check = |l: &str| -> Result<String> {
        if alphabet.iter().any(|a| a == l) {
            Ok(l.to_string())
        } else {
            Err(Error::UnknownLetter(l.to_string()))
        }
    };
    if text.contains(|c: char| c.is_whitespace() || c == ',') {
        return text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(check)
            .collect();
    }
    let mut sorted: Vec<&String> = alphabet.iter().collect();
    sorted.sort_by_key(|a| std::cmp::Reverse(a.len()));
    let mut rest = text;
    let mut out = Vec::new();
    while !rest.is_empty() {
        let a = sorted
            .iter()
            .find(|a| rest.starts_with(a.as_str()))
            .ok_or_else(|| Error::UnknownLetter(rest.chars().next().unwrap().to_string()))?;
        out.push(a.to_string());
        rest = &rest[a.len()..];
    }
    Ok(out)
}

/// Prints a word: letters concatenated when all are single characters,
/// dot-separated otherwise; `ε` for the empty word.
pub fn format_word<S: AsRef<str>>(word: &[S]) -> String {
    if word.is_empty() {
        return "ε".into();
    }
    let sep = if word.iter().all(|a| a.as_ref().chars().count() == 1) {
        ""
    } else {
        "."
    };
    word.iter().map(|a| a.as_ref()).collect::<Vec<_>>().join(sep)
}

/// A complete deterministic automaton produced by the subset construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Vec<String>,
    subsets: Vec<BTreeSet<usize>>,
    accepting: Vec<bool>,
    delta: Vec<Vec<usize>>,
}

impl Dfa {
    pub const START: usize = 0;

    pub fn num_states(&self) -> usize {
        self.subsets.len()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    /// The NFA states making up DFA state `q`.
    pub fn subset(&self, q: usize) -> &BTreeSet<usize> {
        &self.subsets[q]
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn next(&self, q: usize, letter: usize) -> usize {
        self.delta[q][letter]
    }

    pub fn accepts<S: AsRef<str>>(&self, word: &[S]) -> Result<bool> {
        let mut q = Self::START;
        for a in word {
            let i = self
                .alphabet
                .iter()
                .position(|l| l == a.as_ref())
                .ok_or_else(|| Error::UnknownLetter(a.as_ref().to_string()))?;
            q = self.delta[q][i];
        }
        Ok(self.accepting[q])
    }

    /// Re-encodes as a Boolean weighted automaton with states `q0, q1, ...`;
    /// `q0` is the start state.
    pub fn to_automaton(&self) -> WeightedAutomaton {
        let b = Semiring::Boolean;
        let mut aut = WeightedAutomaton::new(b, self.alphabet.clone()).expect("alphabet already validated");
        for q in 0..self.num_states() {
            aut.add_state(format!("q{q}"), Weight::Bool(self.accepting[q]))
                .expect("fresh names");
        }
        for q in 0..self.num_states() {
            for a in 0..self.alphabet.len() {
                aut.add_transition(q, a, b.one(), self.delta[q][a]).expect("in range");
            }
        }
        aut
    }

    /// Automaton text plus comment lines naming the subset behind each state.
    pub fn to_text(&self, source: &WeightedAutomaton) -> String {
        let mut out = String::new();
        for (q, set) in self.subsets.iter().enumerate() {
            let names: Vec<&str> = set.iter().map(|s| source.state_name(*s)).collect();
            let _ = writeln!(out, "# q{q} = {{{}}}", names.join(", "));
        }
        out.push_str(&self.to_automaton().to_text());
        out
    }
}
