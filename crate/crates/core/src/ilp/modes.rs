use std::sync::Arc;

use super::IlpError;
use crate::prolog::{self, Term};

/// Upper bound applied to `*` recall, per predicate per saturation layer.
pub const STAR_RECALL_CAP: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArgMode {
    Input,
    Output,
    Constant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeArg {
    pub mode: ArgMode,
    pub ty: Arc<str>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeDecl {
    /// `None` is `*`.
    pub recall: Option<usize>,
    pub pred: Arc<str>,
    pub args: Vec<ModeArg>,
}

impl ModeDecl {
    fn parse(recall: &Term, template: &Term) -> Result<Self, IlpError> {
        let recall = match recall {
            Term::Atom(a) if a == "*" => None,
            Term::Atom(a) => Some(a.parse().map_err(|_| IlpError::Modes(format!("bad recall `{a}`")))?),
            other => return Err(IlpError::Modes(format!("bad recall `{other}`"))),
        };
        let Some((pred, _)) = template.functor() else {
            return Err(IlpError::Modes(format!("bad template `{template}`")));
        };
        let args = template
            .args()
            .iter()
            .map(|a| match a {
                Term::Compound(op, inner) if inner.len() == 1 => {
                    let mode = match op.as_str() {
                        "+" => ArgMode::Input,
                        "-" => ArgMode::Output,
                        "#" => ArgMode::Constant,
                        _ => return Err(IlpError::Modes(format!("bad argument `{a}`"))),
                    };
                    match &inner[0] {
                        Term::Atom(t) => Ok(ModeArg { mode, ty: t.as_str().into() }),
                        _ => Err(IlpError::Modes(format!("bad argument `{a}`"))),
                    }
                }
                _ => Err(IlpError::Modes(format!("bad argument `{a}`"))),
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { recall, pred: pred.into(), args })
    }
}

/// A head mode plus body modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeSet {
    pub head: ModeDecl,
    pub body: Vec<ModeDecl>,
}

impl ModeSet {
    pub fn body_mode(&self, pred: &str, arity: usize) -> Option<&ModeDecl> {
        self.body.iter().find(|m| &*m.pred == pred && m.args.len() == arity)
    }
}

pub const DEFAULT_MODES: &str = "\
:- modeh(1,class(+mol,#class)).
:- modeb(*,bond(+mol,-atomid,-atomid,#atomtype,#atomtype,#bondtype)).
:- modeb(*,has_struc(+mol,-atomids,-length,#structype)).
:- modeb(*,connected(+mol,#structype,-atomids,#structype,-atomids)).
:- modeb(*,fused(+mol,#structype,-atomids,#structype,-atomids)).
";

/// Parses `modeh/2` and `modeb/2` directives. Without a `modeh`, the head
/// mode defaults to `class(+mol,#class)`.
pub fn parse_modes(text: &str) -> Result<ModeSet, IlpError> {
    let sentences = prolog::parse_program(text).map_err(|e| IlpError::Modes(e.to_string()))?;
    let mut head = None;
    let mut body: Vec<ModeDecl> = Vec::new();
    for s in sentences {
        let terms: Vec<&Term> = match &s.head {
            None => s.body.iter().collect(),
            Some(h) => vec![h],
        };
        for t in terms {
            match t.functor() {
                Some(("modeh", 2)) => head = Some(ModeDecl::parse(&t.args()[0], &t.args()[1])?),
                Some(("modeb", 2)) => body.push(ModeDecl::parse(&t.args()[0], &t.args()[1])?),
                _ => return Err(IlpError::Modes(format!("line {}: expected modeh/2 or modeb/2, found `{t}`", s.line))),
            }
        }
    }
    let head = match head {
        Some(h) => h,
        None => ModeDecl::parse(&Term::Atom("1".into()), &default_head_template())?,
    };
    if head.args.first().map(|a| a.mode) != Some(ArgMode::Input) {
        return Err(IlpError::Modes("head mode must start with an input argument".into()));
    }
    for m in &body {
        if !m.args.iter().any(|a| a.mode == ArgMode::Input) {
            return Err(IlpError::Modes(format!("body mode `{}` has no input argument", m.pred)));
        }
    }
    body.sort_by(|a, b| (&a.pred, a.args.len()).cmp(&(&b.pred, b.args.len())));
    Ok(ModeSet { head, body })
}

fn default_head_template() -> Term {
    let arg = |op: &str, ty: &str| Term::Compound(op.into(), vec![Term::Atom(ty.into())]);
    Term::Compound("class".into(), vec![arg("+", "mol"), arg("#", "class")])
}

pub fn default_modes() -> ModeSet {
    parse_modes(DEFAULT_MODES).expect("default modes parse")
}
