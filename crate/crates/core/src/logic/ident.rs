use std::fmt;
use std::sync::Arc;

/// Whether an identifier denotes a name (a concrete object, never fused) or a
/// variable (fusable, instantiated by `fuse`/`join`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum IdentKind {
    Name,
    Variable,
}

/// A name or a variable. Identity is the pair `(kind, label)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident {
    kind: IdentKind,
    label: Arc<str>,
}

impl Ident {
    pub fn new(kind: IdentKind, label: impl AsRef<str>) -> Self {
        let label = label.as_ref();
        assert!(!label.is_empty(), "identifier labels are non-empty");
        Ident {
            kind,
            label: Arc::from(label),
        }
    }

    pub fn name(label: impl AsRef<str>) -> Self {
        Self::new(IdentKind::Name, label)
    }

    pub fn var(label: impl AsRef<str>) -> Self {
        Self::new(IdentKind::Variable, label)
    }

    pub fn kind(&self) -> IdentKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_name(&self) -> bool {
        self.kind == IdentKind::Name
    }

    pub fn is_var(&self) -> bool {
        self.kind == IdentKind::Variable
    }

    /// Same kind, different label.
    pub fn relabel(&self, label: impl AsRef<str>) -> Self {
        Self::new(self.kind, label)
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl fmt::Debug for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            IdentKind::Name => write!(f, "{}", self.label),
            IdentKind::Variable => write!(f, "?{}", self.label),
        }
    }
}

/// Deterministic supply of labels that avoid a set of reserved ones.
#[derive(Clone, Debug, Default)]
pub struct FreshSupply {
    used: std::collections::HashSet<String>,
    counters: std::collections::HashMap<String, usize>,
}

impl FreshSupply {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reserve(&mut self, label: impl Into<String>) {
        self.used.insert(label.into());
    }

    pub fn reserve_all<'a>(&mut self, labels: impl IntoIterator<Item = &'a Ident>) {
        for id in labels {
            self.used.insert(id.label().to_string());
        }
    }

    pub fn is_used(&self, label: &str) -> bool {
        self.used.contains(label)
    }

    /// Next unused label of the form `{prefix}{k}`; the label is reserved.
    pub fn label(&mut self, prefix: &str) -> String {
        let counter = self.counters.entry(prefix.to_string()).or_insert(0);
        loop {
            *counter += 1;
            let candidate = format!("{prefix}{}", *counter);
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
        }
    }

    pub fn fresh(&mut self, kind: IdentKind) -> Ident {
        let prefix = match kind {
            IdentKind::Name => "n",
            IdentKind::Variable => "x",
        };
        Ident::new(kind, self.label(prefix))
    }

    /// A fresh identifier that keeps `base`'s kind and, when possible, its label stem.
    pub fn freshen(&mut self, base: &Ident) -> Ident {
        let stem: String = base
            .label()
            .trim_end_matches(|c: char| c.is_ascii_digit())
            .to_string();
        let stem = if stem.is_empty() || !stem.starts_with(|c: char| c.is_ascii_alphabetic()) {
            match base.kind() {
                IdentKind::Name => "n".to_string(),
                IdentKind::Variable => "x".to_string(),
            }
        } else {
            stem
        };
        Ident::new(base.kind(), self.label(&stem))
    }
}
