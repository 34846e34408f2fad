//! Dimension-free upper bounds on `B_Q` from tracial moment matrices.
//!
//! Operators `rho1`, `rho2`, `Y` and the projectors `P_y = M^y_1` are
//! replaced by their trace moments. Three localizing blocks
//! `Gamma_X[u, v] = Tr(X u^dag v)` over a 10-word list and one moment block
//! `Gamma[u, v] = Tr(u^dag v)` over a 16-word list carry the relaxation.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::games::{gambling_value, GameParams};
use crate::quantum::{c, hermitian_eigen, min_eigenvalue, CMatrix, PureState};
use crate::sdp::{Infeasibility, SdpProblem, SdpSolution, Sense, SolveStatus, SolverOptions, SparseHermitian};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    Rho1,
    Rho2,
    Y,
    P1,
    P2,
    P3,
}

impl Letter {
    fn is_projector(self) -> bool {
        matches!(self, Letter::P1 | Letter::P2 | Letter::P3)
    }

    fn is_state(self) -> bool {
        matches!(self, Letter::Rho1 | Letter::Rho2)
    }

    fn name(self) -> &'static str {
        match self {
            Letter::Rho1 => "rho1",
            Letter::Rho2 => "rho2",
            Letter::Y => "Y",
            Letter::P1 => "P1",
            Letter::P2 => "P2",
            Letter::P3 => "P3",
        }
    }

    pub fn projector(y: usize) -> Letter {
        [Letter::P1, Letter::P2, Letter::P3][y]
    }
}

/// A product of self-adjoint letters; the empty word is the identity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: &[Letter]) -> Self {
        Word(letters.to_vec()).canonical()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Collapses adjacent equal projectors.
    pub fn canonical(&self) -> Self {
        Word(reduce(&self.0, false))
    }

    /// Involution: reversed order, every letter self-adjoint.
    pub fn adjoint(&self) -> Self {
        Word(self.0.iter().rev().copied().collect())
    }

    fn concat(parts: &[&[Letter]]) -> Vec<Letter> {
        parts.iter().flat_map(|p| p.iter().copied()).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let names: Vec<&str> = self.0.iter().map(|l| l.name()).collect();
        f.write_str(&names.join("*"))
    }
}

fn collapsible(l: Letter, pure: bool) -> bool {
    l.is_projector() || (pure && l.is_state())
}

fn reduce(w: &[Letter], pure: bool) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&l) && collapsible(l, pure) {
            continue;
        }
        out.push(l);
    }
    out
}

/// Reduction that also treats the word as cyclic.
fn cyclic_reduce(w: &[Letter], pure: bool) -> Vec<Letter> {
    let mut w = reduce(w, pure);
    while w.len() > 1 && w[0] == w[w.len() - 1] && collapsible(w[0], pure) {
        w = reduce(&w[1..], pure);
    }
    w
}

fn min_rotation(w: &[Letter]) -> Vec<Letter> {
    if w.is_empty() {
        return Vec::new();
    }
    (0..w.len())
        .map(|k| Word::concat(&[&w[k..], &w[..k]]))
        .min()
        .expect("nonempty")
}

/// `(small, large)` word lists.
pub fn build_word_lists() -> (Vec<Word>, Vec<Word>) {
    use Letter::*;
    let ps = [P1, P2, P3];
    let rs = [Rho1, Rho2];
    let mut small = vec![Word::identity()];
    small.extend(ps.iter().map(|&p| Word(vec![p])));
    for &a in &ps {
        for &b in &ps {
            if a != b {
                small.push(Word(vec![a, b]));
            }
        }
    }
    let mut large = vec![Word::identity()];
    large.extend(rs.iter().map(|&r| Word(vec![r])));
    large.extend(ps.iter().map(|&p| Word(vec![p])));
    for &r in &rs {
        for &s in &rs {
            large.push(Word(vec![r, s]));
        }
        for &p in &ps {
            large.push(Word(vec![r, p]));
        }
    }
    large.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    (small, large)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InterlinkLevel {
    /// Literal word identification inside each block plus the explicit
    /// constraints.
    #[default]
    PaperMin,
    /// Cyclic trace classes shared across all blocks, with the purity
    /// reduction `rho_i rho_i -> rho_i`.
    Full,
}

impl fmt::Display for InterlinkLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InterlinkLevel::PaperMin => "paper-min",
            InterlinkLevel::Full => "full",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MomentField {
    #[default]
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum MomentBlock {
    Rho1,
    Rho2,
    Y,
    Gamma,
}

impl MomentBlock {
    pub const ALL: [MomentBlock; 4] = [MomentBlock::Rho1, MomentBlock::Rho2, MomentBlock::Y, MomentBlock::Gamma];

    fn prefix(self) -> Option<Letter> {
        match self {
            MomentBlock::Rho1 => Some(Letter::Rho1),
            MomentBlock::Rho2 => Some(Letter::Rho2),
            MomentBlock::Y => Some(Letter::Y),
            MomentBlock::Gamma => None,
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    fn name(self) -> &'static str {
        match self {
            MomentBlock::Rho1 => "Gamma_rho1",
            MomentBlock::Rho2 => "Gamma_rho2",
            MomentBlock::Y => "Gamma_Y",
            MomentBlock::Gamma => "Gamma",
        }
    }
}

/// One matrix entry `(block, row, col)` with `row <= col`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Entry {
    pub block: MomentBlock,
    pub row: usize,
    pub col: usize,
}

/// A shared scalar: entries whose moments coincide. `conj` marks members
/// equal to the complex conjugate of the representative.
#[derive(Clone, Debug)]
pub struct MomentClass {
    pub key: String,
    pub members: Vec<(Entry, bool)>,
}

#[derive(Clone, Debug)]
pub struct MomentProgram {
    params: GameParams,
    level: InterlinkLevel,
    field: MomentField,
    small: Vec<Word>,
    large: Vec<Word>,
    problem: SdpProblem,
    classes: Vec<MomentClass>,
    labels: Vec<String>,
    counts: ConstraintCounts,
    reduced: Option<Box<MomentProgram>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConstraintCounts {
    pub norm: usize,
    pub proj: usize,
    pub pure: usize,
    pub identification: usize,
    pub offsets: usize,
}

type ClassKey = (Option<MomentBlock>, Vec<Letter>);

impl MomentProgram {
    pub fn build(params: GameParams, level: InterlinkLevel, field: MomentField) -> Result<Self> {
        params.validate()?;
        let (small, large) = build_word_lists();
        // Tr(1), Tr(P_y) and Tr(P_y P_y') are unbounded and enter nothing
        // else, so the dual vanishes on those rows of Gamma; solving on the
        // face without them keeps the dual strictly feasible.
        // Under the purity reduction the rows of rho_i rho_i repeat those of
        // rho_i and are dropped as well.
        let kept: Vec<Word> = large
            .iter()
            .filter(|w| w.0.iter().any(|l| l.is_state()))
            .filter(|w| level == InterlinkLevel::PaperMin || reduce(&w.0, true) == w.0)
            .cloned()
            .collect();
        let reduced = Self::assemble(params, level, field, small.clone(), kept)?;
        let mut prog = Self::assemble(params, level, field, small, large)?;
        prog.reduced = Some(Box::new(reduced));
        Ok(prog)
    }

    fn assemble(params: GameParams, level: InterlinkLevel, field: MomentField, small: Vec<Word>, large: Vec<Word>) -> Result<Self> {
        let mut problem = SdpProblem::new(Sense::Maximize);
        for b in MomentBlock::ALL {
            let n = if b == MomentBlock::Gamma { large.len() } else { small.len() };
            let idx = problem.add_block(n);
            debug_assert_eq!(idx, b.index());
        }
        let mut prog = Self {
            params,
            level,
            field,
            small,
            large,
            problem,
            classes: Vec::new(),
            labels: Vec::new(),
            counts: ConstraintCounts::default(),
            reduced: None,
        };
        prog.add_identifications()?;
        prog.add_explicit_constraints()?;
        prog.add_offsets()?;
        prog.set_objective()?;
        Ok(prog)
    }

    fn words(&self, b: MomentBlock) -> &[Word] {
        if b == MomentBlock::Gamma {
            &self.large
        } else {
            &self.small
        }
    }

    /// Letters of the trace `Tr(prefix u^dag v)`.
    fn entry_word(&self, b: MomentBlock, i: usize, j: usize) -> Vec<Letter> {
        let w = self.words(b);
        let pre: Vec<Letter> = b.prefix().into_iter().collect();
        Word::concat(&[&pre, &w[i].adjoint().0, &w[j].0])
    }

    /// Class of an entry and whether it is the conjugate of the class value.
    fn class_of(&self, b: MomentBlock, i: usize, j: usize) -> (ClassKey, bool) {
        match self.level {
            InterlinkLevel::PaperMin => {
                let fwd = reduce(&self.entry_word(b, i, j), false);
                let bwd = reduce(&self.entry_word(b, j, i), false);
                if bwd < fwd {
                    ((Some(b), bwd), true)
                } else {
                    ((Some(b), fwd), false)
                }
            }
            InterlinkLevel::Full => {
                let w = cyclic_reduce(&self.entry_word(b, i, j), true);
                let fwd = min_rotation(&w);
                let bwd = min_rotation(&w.iter().rev().copied().collect::<Vec<_>>());
                if bwd < fwd {
                    ((None, bwd), true)
                } else {
                    ((None, fwd), false)
                }
            }
        }
    }

    fn add_identifications(&mut self) -> Result<()> {
        let mut groups: BTreeMap<ClassKey, Vec<(Entry, bool)>> = BTreeMap::new();
        for b in MomentBlock::ALL {
            let n = self.words(b).len();
            for i in 0..n {
                for j in i..n {
                    let (key, conj) = self.class_of(b, i, j);
                    groups.entry(key).or_default().push((Entry { block: b, row: i, col: j }, conj));
                }
            }
        }
        let complex = self.field == MomentField::Complex;
        for ((tag, letters), members) in groups {
            let key = match tag {
                Some(b) => format!("{}:{}", b.name(), Word(letters.clone())),
                None => format!("Tr:{}", Word(letters.clone())),
            };
            let (rep, rep_conj) = members[0];
            for &(e, conj) in &members[1..] {
                let row = vec![
                    (e.block.index(), SparseHermitian::re_entry(self.dim(e.block), e.row, e.col, 1.0)),
                    (rep.block.index(), SparseHermitian::re_entry(self.dim(rep.block), rep.row, rep.col, -1.0)),
                ];
                self.push_equality(row, 0.0, format!("identify Re {} = Re {}", describe(e), describe(rep)))?;
                if complex && e.row != e.col {
                    let sign = if conj == rep_conj { -1.0 } else { 1.0 };
                    let mut row = vec![(e.block.index(), SparseHermitian::im_entry(self.dim(e.block), e.row, e.col, 1.0))];
                    if rep.row != rep.col {
                        row.push((
                            rep.block.index(),
                            SparseHermitian::im_entry(self.dim(rep.block), rep.row, rep.col, sign),
                        ));
                    }
                    self.push_equality(row, 0.0, format!("identify Im {} with {}", describe(e), describe(rep)))?;
                }
            }
            // a class closed under the involution is real
            if complex && rep.row != rep.col && self.self_conjugate(&letters, tag.is_some(), &members) {
                let row = vec![(rep.block.index(), SparseHermitian::im_entry(self.dim(rep.block), rep.row, rep.col, 1.0))];
                self.push_equality(row, 0.0, format!("real {}", describe(rep)))?;
            }
            self.classes.push(MomentClass { key, members });
        }
        self.counts.identification = self.labels.len();
        Ok(())
    }

    fn self_conjugate(&self, letters: &[Letter], literal: bool, members: &[(Entry, bool)]) -> bool {
        if literal {
            members.iter().any(|&(e, _)| {
                reduce(&self.entry_word(e.block, e.row, e.col), false)
                    == reduce(&self.entry_word(e.block, e.col, e.row), false)
            })
        } else {
            let rev: Vec<Letter> = letters.iter().rev().copied().collect();
            min_rotation(&rev) == letters
        }
    }

    fn dim(&self, b: MomentBlock) -> usize {
        self.words(b).len()
    }

    fn push_equality(&mut self, terms: Vec<(usize, SparseHermitian)>, rhs: f64, label: String) -> Result<()> {
        self.problem.add_equality(terms, rhs)?;
        self.labels.push(label);
        Ok(())
    }

    fn word_index(&self, b: MomentBlock, letters: &[Letter]) -> usize {
        self.find_word(b, letters).expect("word in list")
    }

    fn find_word(&self, b: MomentBlock, letters: &[Letter]) -> Option<usize> {
        let w = Word(letters.to_vec());
        self.words(b).iter().position(|x| *x == w)
    }

    fn entry_eq(&mut self, b: MomentBlock, i: usize, j: usize, rhs: f64, label: String) -> Result<()> {
        let (i, j) = (i.min(j), i.max(j));
        let row = vec![(b.index(), SparseHermitian::re_entry(self.dim(b), i, j, 1.0))];
        self.push_equality(row, rhs, label)
    }

    fn add_explicit_constraints(&mut self) -> Result<()> {
        use Letter::*;
        for b in [MomentBlock::Rho1, MomentBlock::Rho2] {
            self.entry_eq(b, 0, 0, 1.0, format!("normCon {}[1,1] = 1", b.name()))?;
            self.counts.norm += 1;
        }
        for b in [MomentBlock::Rho1, MomentBlock::Rho2, MomentBlock::Y] {
            for y in 0..3 {
                let p = self.word_index(b, &[Letter::projector(y)]);
                let n = self.dim(b);
                let row = vec![
                    (b.index(), SparseHermitian::re_entry(n, 0, p, 1.0)),
                    (b.index(), SparseHermitian::re_entry(n, p, p, -1.0)),
                ];
                self.push_equality(row, 0.0, format!("projCon {}[1,P{}] = [P{},P{}]", b.name(), y + 1, y + 1, y + 1))?;
                self.counts.proj += 1;
            }
        }
        for r in [Rho1, Rho2] {
            let k = self.word_index(MomentBlock::Gamma, &[r]);
            if let Some(one) = self.find_word(MomentBlock::Gamma, &[]) {
                self.entry_eq(MomentBlock::Gamma, one, k, 1.0, format!("pureCon Gamma[1,{}] = 1", r.name()))?;
                self.counts.pure += 1;
            }
            self.entry_eq(MomentBlock::Gamma, k, k, 1.0, format!("pureCon Gamma[{0},{0}] = 1", r.name()))?;
            self.counts.pure += 1;
        }
        Ok(())
    }

    fn add_offsets(&mut self) -> Result<()> {
        let (a, b) = (self.params.alpha, self.params.beta);
        let n = self.small.len();
        let zero = CMatrix::zeros(n, n);
        let (r1, r2, y) = (MomentBlock::Rho1.index(), MomentBlock::Rho2.index(), MomentBlock::Y.index());
        self.problem.add_psd_offset(&zero, &[(y, 1.0), (r1, -0.5), (r2, 0.5 * b)])?;
        self.problem.add_psd_offset(&zero, &[(y, 1.0), (r2, -0.5), (r1, 0.5 * b)])?;
        self.problem.add_psd_offset(&zero, &[(y, 1.0), (r1, -0.5 * a), (r2, -0.5 * a)])?;
        self.counts.offsets = 3;
        Ok(())
    }

    /// Objective coefficients on `[Gamma_rho1]_{1,P_k}`, `[Gamma_rho2]_{1,P_k}`
    /// and `[Gamma_Y]_{1,1}`, plus the constant.
    pub fn objective_coefficients(params: GameParams) -> ([f64; 3], [f64; 3], f64, f64) {
        let (a, b) = (params.alpha, params.beta);
        let ab = a + b;
        (
            [1.0 - a, (1.0 + b) - ab, -ab],
            [-(1.0 - a), -ab, (1.0 + b) - ab],
            -2.0,
            4.0 * ab + (1.0 - a) - 2.0 * (2.0 * b + 1.0),
        )
    }

    fn set_objective(&mut self) -> Result<()> {
        let (ca, cb, cy, k) = Self::objective_coefficients(self.params);
        let n = self.small.len();
        for (block, coefs) in [(MomentBlock::Rho1, ca), (MomentBlock::Rho2, cb)] {
            let mut obj = SparseHermitian::zeros(n);
            for (y, &cf) in coefs.iter().enumerate() {
                let p = self.word_index(block, &[Letter::projector(y)]);
                obj = obj.plus(&SparseHermitian::re_entry(n, 0, p, cf));
            }
            self.problem.set_objective_sparse(block.index(), obj)?;
        }
        self.problem
            .set_objective_sparse(MomentBlock::Y.index(), SparseHermitian::re_entry(n, 0, 0, cy))?;
        self.problem.set_objective_constant(k);
        Ok(())
    }

    pub fn params(&self) -> GameParams {
        self.params
    }

    pub fn level(&self) -> InterlinkLevel {
        self.level
    }

    pub fn field(&self) -> MomentField {
        self.field
    }

    pub fn small_words(&self) -> &[Word] {
        &self.small
    }

    pub fn large_words(&self) -> &[Word] {
        &self.large
    }

    pub fn problem(&self) -> &SdpProblem {
        &self.problem
    }

    pub fn classes(&self) -> &[MomentClass] {
        &self.classes
    }

    pub fn constraint_labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> ConstraintCounts {
        self.counts
    }

    /// Number of distinct scalar moments.
    pub fn num_variables(&self) -> usize {
        self.classes.len()
    }

    /// Program actually handed to the solver: `Gamma` restricted to the
    /// words containing a state.
    pub fn solver_program(&self) -> &MomentProgram {
        self.reduced.as_deref().unwrap_or(self)
    }

    pub fn solve(&self, options: &SolverOptions) -> Result<SdpSolution> {
        let opts = SolverOptions {
            force_complex: self.field == MomentField::Complex,
            ..*options
        };
        self.solver_program().problem.solve(&opts)
    }

    /// Checks a candidate point given as the four blocks in
    /// [`MomentBlock::ALL`] order.
    pub fn check_point(&self, blocks: &[CMatrix]) -> PointCheck {
        let offsets = self.problem.offset_expressions(blocks);
        PointCheck {
            objective: self.problem.objective_value(blocks),
            max_equality_residual: self.problem.equality_residual(blocks),
            min_block_eigenvalue: blocks.iter().map(min_eigenvalue).fold(f64::INFINITY, f64::min),
            min_offset_eigenvalue: offsets.iter().map(min_eigenvalue).fold(f64::INFINITY, f64::min),
        }
    }

    /// Moment blocks generated by explicit operators.
    pub fn moment_point(&self, ops: &ExplicitOperators) -> Vec<CMatrix> {
        MomentBlock::ALL
            .iter()
            .map(|&b| {
                let words = self.words(b);
                let mats: Vec<CMatrix> = words.iter().map(|w| ops.evaluate(&w.0)).collect();
                let pre = b.prefix().map(|l| ops.letter(l).clone());
                let n = words.len();
                CMatrix::from_fn(n, n, |i, j| {
                    let prod = mats[i].adjoint() * &mats[j];
                    let prod = match &pre {
                        Some(p) => p * prod,
                        None => prod,
                    };
                    prod.trace()
                })
            })
            .collect()
    }

    /// Structured text listing classes and constraints.
    pub fn write_audit<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# moment program alpha={} beta={} level={} field={:?}", self.params.alpha, self.params.beta, self.level, self.field)?;
        writeln!(w, "small_words {}", self.small.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))?;
        writeln!(w, "large_words {}", self.large.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))?;
        for cls in &self.classes {
            let members: Vec<String> = cls
                .members
                .iter()
                .map(|(e, conj)| format!("{}{}", describe(*e), if *conj { "*" } else { "" }))
                .collect();
            writeln!(w, "class {} {}", cls.key, members.join(" "))?;
        }
        for (k, (label, eq)) in self.labels.iter().zip(self.problem.equalities()).enumerate() {
            writeln!(w, "constraint {k} rhs={} {label}", eq.rhs)?;
        }
        for (k, off) in self.problem.offsets().iter().enumerate() {
            let terms: Vec<String> = off.terms.iter().map(|(b, cf)| format!("{cf}*{}", MomentBlock::ALL[*b].name())).collect();
            writeln!(w, "psd_offset {k} {} >= 0", terms.join(" + "))?;
        }
        Ok(())
    }
}

fn describe(e: Entry) -> String {
    format!("{}[{},{}]", e.block.name(), e.row, e.col)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointCheck {
    pub objective: f64,
    pub max_equality_residual: f64,
    pub min_block_eigenvalue: f64,
    pub min_offset_eigenvalue: f64,
}

impl PointCheck {
    pub fn is_feasible(&self, tol: f64) -> bool {
        self.max_equality_residual <= tol && self.min_block_eigenvalue >= -tol && self.min_offset_eigenvalue >= -tol
    }
}

/// Concrete operators substituted for the letters.
#[derive(Clone, Debug)]
pub struct ExplicitOperators {
    pub rho1: CMatrix,
    pub rho2: CMatrix,
    pub y: CMatrix,
    pub projectors: [CMatrix; 3],
}

impl ExplicitOperators {
    /// Optimal strategy for a fixed pair of pure states: Helstrom
    /// projectors for the three binary sub-tasks and the gambling dual `Y`.
    pub fn optimal_for(psi1: &PureState, psi2: &PureState, params: GameParams) -> Result<Self> {
        let (r1, r2) = (psi1.density(), psi2.density());
        let (a, b) = (params.alpha, params.beta);
        let (m1, m2) = (r1.matrix(), r2.matrix());
        let rho = (m1 + m2) * c(0.5, 0.0);
        let w = c((1.0 + b) / 2.0, 0.0);
        let y = gambling_value(&r1, &r2, params)?.dual_y;
        Ok(Self {
            rho1: m1.clone(),
            rho2: m2.clone(),
            y,
            projectors: [
                positive_projector(&(m1 - m2)),
                positive_projector(&(m1 * w - &rho * c(a + b, 0.0))),
                positive_projector(&(m2 * w - &rho * c(a + b, 0.0))),
            ],
        })
    }

    fn letter(&self, l: Letter) -> &CMatrix {
        match l {
            Letter::Rho1 => &self.rho1,
            Letter::Rho2 => &self.rho2,
            Letter::Y => &self.y,
            Letter::P1 => &self.projectors[0],
            Letter::P2 => &self.projectors[1],
            Letter::P3 => &self.projectors[2],
        }
    }

    fn evaluate(&self, w: &[Letter]) -> CMatrix {
        let d = self.rho1.nrows();
        w.iter().fold(CMatrix::identity(d, d), |acc, &l| acc * self.letter(l))
    }
}

/// Projector onto the strictly positive eigenspace.
fn positive_projector(h: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(h);
    let d = h.nrows();
    let mut p = CMatrix::zeros(d, d);
    for (i, &v) in vals.iter().enumerate() {
        if v > 0.0 {
            let col = vecs.column(i);
            p += &col * col.adjoint();
        }
    }
    p
}

#[derive(Clone, Debug, Serialize)]
pub struct UpperBoundResult {
    pub b_qub: f64,
    pub gap_to_seesaw: Option<f64>,
    pub status: SolveStatus,
    pub duality_gap: f64,
    pub level: InterlinkLevel,
    pub num_variables: usize,
    pub num_equalities: usize,
    pub min_block_eigenvalue: f64,
}

pub fn upper_bound(params: GameParams, level: InterlinkLevel) -> Result<UpperBoundResult> {
    let tol = Tolerances::from_env();
    upper_bound_with(params, level, MomentField::Real, &SolverOptions::with_tolerance(tol.gap), None)
}

pub fn upper_bound_with(
    params: GameParams,
    level: InterlinkLevel,
    field: MomentField,
    options: &SolverOptions,
    b_ql: Option<f64>,
) -> Result<UpperBoundResult> {
    let prog = MomentProgram::build(params, level, field)?;
    let sol = prog.solve(options)?;
    if let Some(Infeasibility::Dual { .. }) = sol.infeasibility {
        return Err(Error::Unbounded);
    }
    if !matches!(sol.status, SolveStatus::Optimal | SolveStatus::NearOptimal) {
        return Err(Error::Solver {
            status: sol.status,
            gap: sol.gap,
            residual: sol.primal_residual.max(sol.dual_residual),
        });
    }
    // any dual feasible point bounds the maximum from above
    let b_qub = sol.dual_value;
    Ok(UpperBoundResult {
        b_qub,
        gap_to_seesaw: b_ql.map(|l| b_qub - l),
        status: sol.status,
        duality_gap: sol.gap,
        level,
        num_variables: prog.num_variables(),
        num_equalities: prog.problem().num_equalities(),
        min_block_eigenvalue: sol.block_values.iter().map(min_eigenvalue).fold(f64::INFINITY, f64::min),
    })
}
