//! Typing contexts and their algebra: split, difference and level division.

use std::fmt;

use thiserror::Error;

use crate::types::{equal_ctx, CtxType, Name};

#[derive(Clone, Debug)]
pub struct Binding {
    pub name: Name,
    pub ty: CtxType,
}

/// An ordered list of bindings. Order only matters for deterministic
/// messages; equality is as finite maps (exchange is admissible).
#[derive(Clone, Debug, Default)]
pub struct Context {
    bindings: Vec<Binding>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ContextError {
    #[error("linear variable `{0}` is never used")]
    LinearUnused(Name),
    #[error("too many linear bindings to enumerate splits ({0})")]
    TooManyLinear(usize),
}

/// Contexts with more linear bindings than this are not split exhaustively.
pub const SPLIT_CAP: usize = 12;

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn from_bindings(bs: impl IntoIterator<Item = (Name, CtxType)>) -> Context {
        let mut ctx = Context::new();
        for (x, t) in bs {
            ctx.insert(x, t);
        }
        ctx
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Binding> {
        self.bindings.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.bindings.iter().map(|b| &b.name)
    }

    pub fn get(&self, x: &str) -> Option<&CtxType> {
        self.bindings.iter().find(|b| b.name == x).map(|b| &b.ty)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.get(x).is_some()
    }

    /// Adds or replaces the binding for `x`.
    pub fn insert(&mut self, x: impl Into<Name>, ty: CtxType) {
        let name = x.into();
        match self.bindings.iter_mut().find(|b| b.name == name) {
            Some(b) => b.ty = ty,
            None => self.bindings.push(Binding { name, ty }),
        }
    }

    pub fn remove(&mut self, x: &str) -> Option<CtxType> {
        let i = self.bindings.iter().position(|b| b.name == x)?;
        Some(self.bindings.remove(i).ty)
    }

    pub fn filter(&self, keep: impl Fn(&Binding) -> bool) -> Context {
        Context {
            bindings: self.bindings.iter().filter(|b| keep(b)).cloned().collect(),
        }
    }

    pub fn un_part(&self) -> Context {
        self.filter(|b| b.ty.is_unrestricted())
    }

    pub fn lin_part(&self) -> Context {
        self.filter(|b| b.ty.is_linear())
    }

    pub fn is_unrestricted(&self) -> bool {
        self.bindings.iter().all(|b| b.ty.is_unrestricted())
    }

    pub fn level_at_least(&self, n: usize) -> bool {
        self.bindings.iter().all(|b| b.ty.level >= n)
    }

    pub fn level_below(&self, n: usize) -> bool {
        self.bindings.iter().all(|b| b.ty.level < n)
    }

    /// `(outer, rest)`: the bindings of level at least `n`, and the others.
    pub fn divide(&self, n: usize) -> (Context, Context) {
        (
            self.filter(|b| b.ty.level >= n),
            self.filter(|b| b.ty.level < n),
        )
    }

    /// `Γ ÷ x`: unchanged when `x` is absent, without `x` when it is
    /// unrestricted, undefined when it is linear.
    pub fn difference(&self, x: &str) -> Result<Context, ContextError> {
        match self.get(x) {
            None => Ok(self.clone()),
            Some(t) if t.is_unrestricted() => {
                let mut out = self.clone();
                out.remove(x);
                Ok(out)
            }
            Some(_) => Err(ContextError::LinearUnused(x.to_string())),
        }
    }

    /// Union of two contexts with disjoint (or agreeing) domains.
    pub fn merge(&self, other: &Context) -> Context {
        let mut out = self.clone();
        for b in &other.bindings {
            if !out.contains(&b.name) {
                out.bindings.push(b.clone());
            }
        }
        out
    }

    /// Every `(Γ1, Γ2)` with `Γ = Γ1 ∘ Γ2`: unrestricted bindings go to both
    /// sides, each linear binding to exactly one.
    pub fn enumerate_splits(&self) -> Result<Vec<(Context, Context)>, ContextError> {
        let lin: Vec<&Binding> = self.bindings.iter().filter(|b| b.ty.is_linear()).collect();
        if lin.len() > SPLIT_CAP {
            return Err(ContextError::TooManyLinear(lin.len()));
        }
        let un = self.un_part();
        let mut out = Vec::with_capacity(1 << lin.len());
        for mask in 0u32..(1 << lin.len()) {
            let mut left = un.clone();
            let mut right = un.clone();
            for (i, b) in lin.iter().enumerate() {
                let side = if mask & (1 << i) == 0 {
                    &mut left
                } else {
                    &mut right
                };
                side.bindings.push((*b).clone());
            }
            out.push((left, right));
        }
        Ok(out)
    }

    /// Names of linear bindings present here but absent from `other`.
    pub fn linear_missing_from(&self, other: &Context) -> Vec<Name> {
        self.bindings
            .iter()
            .filter(|b| b.ty.is_linear() && !other.contains(&b.name))
            .map(|b| b.name.clone())
            .collect()
    }
}

impl PartialEq for Context {
    fn eq(&self, other: &Context) -> bool {
        self.len() == other.len()
            && self.bindings.iter().all(|b| match other.get(&b.name) {
                Some(t) => equal_ctx(&b.ty, t),
                None => false,
            })
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = crate::syntax::Printer::plain();
        let items: Vec<String> = self
            .bindings
            .iter()
            .map(|b| format!("{}: {}", b.name, p.ctx_type(&b.ty)))
            .collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}
