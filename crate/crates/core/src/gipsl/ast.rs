//! Untyped syntax tree produced by the parser.

use std::fmt;

/// Source position (1-based).
///
/// Spans never participate in equality, so trees that differ only in layout
/// compare equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Spec {
    pub rules: Vec<RuleDecl>,
    pub patterns: Vec<PatternDecl>,
    pub mappings: Vec<MappingDecl>,
    pub constraints: Vec<ConstraintDecl>,
    pub objectives: Vec<ObjectiveDecl>,
    pub global_objective: Option<GlobalObjectiveDecl>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeDecl {
    pub name: String,
    pub ty: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDecl {
    pub name: Option<String>,
    pub ty: String,
    pub src: String,
    pub tgt: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternDecl {
    pub name: String,
    pub nodes: Vec<NodeDecl>,
    pub edges: Vec<EdgeDecl>,
    pub conditions: Vec<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActionDecl {
    CreateNode { name: String, ty: String, attrs: Vec<(String, Expr)>, span: Span },
    CreateEdge { ty: String, src: String, tgt: String, span: Span },
    DeleteEdge { name: String, span: Span },
    DeleteNode { name: String, span: Span },
    SetAttr { node: String, attr: String, value: Expr, span: Span },
}

impl ActionDecl {
    pub fn span(&self) -> Span {
        match self {
            ActionDecl::CreateNode { span, .. }
            | ActionDecl::CreateEdge { span, .. }
            | ActionDecl::DeleteEdge { span, .. }
            | ActionDecl::DeleteNode { span, .. }
            | ActionDecl::SetAttr { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleDecl {
    pub lhs: PatternDecl,
    pub actions: Vec<ActionDecl>,
}

impl RuleDecl {
    pub fn name(&self) -> &str {
        &self.lhs.name
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappingDecl {
    pub name: String,
    pub rule: String,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContextKind {
    Class,
    Pattern,
    Mapping,
}

impl ContextKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ContextKind::Class => "class",
            ContextKind::Pattern => "pattern",
            ContextKind::Mapping => "mapping",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    pub kind: ContextKind,
    pub target: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintDecl {
    pub context: Context,
    pub body: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveDecl {
    pub name: String,
    pub context: Context,
    pub body: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalObjectiveDecl {
    pub sense: Sense,
    pub body: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Real(f64),
    Bool(bool),
    Str(String),
    Path(Path),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Set(Box<SetExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathRoot {
    SelfRef,
    Var(String),
}

/// `root`, `root.attr`, `root.nodes().N`, `root.nodes().N.attr` or `root.value()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub root: PathRoot,
    pub node: Option<String>,
    pub attr: Option<String>,
    pub value: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lambda {
    pub var: String,
    pub body: Expr,
}

/// `mappings.NAME [->filter(v | pred)] ->sum(v | expr)`
#[derive(Debug, Clone, PartialEq)]
pub struct SetExpr {
    pub mapping: String,
    pub filter: Option<Lambda>,
    pub sum: Lambda,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
    Sin,
    Cos,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Or => "|",
            BinaryOp::And => "&",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 3,
            BinaryOp::Add | BinaryOp::Sub => 4,
            BinaryOp::Mul | BinaryOp::Div => 5,
        }
    }

    pub fn is_relational(self) -> bool {
        self.precedence() == 3
    }
}
