use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::GipslError;

/// Parses a specification document into an untyped [`Spec`].
pub fn parse(src: &str) -> Result<Spec, GipslError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0 };
    p.spec()
}

/// Parses a single expression (used by tests and tooling).
pub fn parse_expr(src: &str) -> Result<Expr, GipslError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

const UNARY_FUNCS: [(&str, UnaryOp); 3] = [("sin", UnaryOp::Sin), ("cos", UnaryOp::Cos), ("sqrt", UnaryOp::Sqrt)];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, GipslError> {
        let t = &self.tokens[self.pos];
        let expected: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
        Err(GipslError::Syntax {
            line: t.span.line,
            col: t.span.col,
            message: format!("unexpected {}, expected {}", t.tok.describe(), expected.join(" or ")),
            expected,
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<Span, GipslError> {
        if self.is_sym(s) {
            Ok(self.bump().span)
        } else {
            self.error(&[&format!("`{s}`")])
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<Span, GipslError> {
        if self.is_kw(kw) {
            Ok(self.bump().span)
        } else {
            self.error(&[&format!("`{kw}`")])
        }
    }

    fn ident(&mut self) -> Result<String, GipslError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn expect_eof(&self) -> Result<(), GipslError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => self.error(&["end of input"]),
        }
    }

    fn spec(&mut self) -> Result<Spec, GipslError> {
        let mut spec = Spec::default();
        loop {
            match self.peek().clone() {
                Tok::Eof => return Ok(spec),
                Tok::Ident(kw) => match kw.as_str() {
                    "rule" => {
                        let span = self.bump().span;
                        let (lhs, actions) = self.pattern_body(span, true)?;
                        spec.rules.push(RuleDecl { lhs, actions });
                    }
                    "pattern" => {
                        let span = self.bump().span;
                        let (lhs, _) = self.pattern_body(span, false)?;
                        spec.patterns.push(lhs);
                    }
                    "mapping" => {
                        let span = self.bump().span;
                        let name = self.ident()?;
                        self.expect_kw("with")?;
                        let rule = self.ident()?;
                        self.expect_sym(";")?;
                        spec.mappings.push(MappingDecl { name, rule, span });
                    }
                    "constraint" => {
                        let span = self.bump().span;
                        self.expect_sym("->")?;
                        let context = self.context()?;
                        let body = self.braced_expr()?;
                        spec.constraints.push(ConstraintDecl { context, body, span });
                    }
                    "objective" => {
                        let span = self.bump().span;
                        let name = self.ident()?;
                        self.expect_sym("->")?;
                        let context = self.context()?;
                        let body = self.braced_expr()?;
                        spec.objectives.push(ObjectiveDecl { name, context, body, span });
                    }
                    "global" => {
                        let span = self.bump().span;
                        if spec.global_objective.is_some() {
                            return Err(GipslError::Syntax {
                                line: span.line,
                                col: span.col,
                                message: "duplicate global objective".into(),
                                expected: Vec::new(),
                            });
                        }
                        self.expect_kw("objective")?;
                        self.expect_sym(":")?;
                        let sense = match self.peek() {
                            Tok::Ident(s) if s == "min" || s == "Min" => Sense::Min,
                            Tok::Ident(s) if s == "max" || s == "Max" => Sense::Max,
                            _ => return self.error(&["`min`", "`max`"]),
                        };
                        self.bump();
                        let body = self.braced_expr()?;
                        spec.global_objective = Some(GlobalObjectiveDecl { sense, body, span });
                    }
                    _ => return self.error(&["`rule`", "`pattern`", "`mapping`", "`constraint`", "`objective`", "`global`"]),
                },
                _ => return self.error(&["`rule`", "`pattern`", "`mapping`", "`constraint`", "`objective`", "`global`"]),
            }
        }
    }

    fn context(&mut self) -> Result<Context, GipslError> {
        let span = self.span();
        let kind = match self.peek() {
            Tok::Ident(s) if s == "class" => ContextKind::Class,
            Tok::Ident(s) if s == "pattern" => ContextKind::Pattern,
            Tok::Ident(s) if s == "mapping" => ContextKind::Mapping,
            _ => return self.error(&["`class`", "`pattern`", "`mapping`"]),
        };
        self.bump();
        self.expect_sym("::")?;
        let target = self.ident()?;
        Ok(Context { kind, target, span })
    }

    fn braced_expr(&mut self) -> Result<Expr, GipslError> {
        self.expect_sym("{")?;
        let e = self.expr()?;
        self.expect_sym("}")?;
        Ok(e)
    }

    fn pattern_body(&mut self, span: Span, allow_actions: bool) -> Result<(PatternDecl, Vec<ActionDecl>), GipslError> {
        let name = self.ident()?;
        self.expect_sym("{")?;
        let mut pat = PatternDecl { name, nodes: Vec::new(), edges: Vec::new(), conditions: Vec::new(), span };
        let mut actions = Vec::new();
        let mut stmt_kws = vec!["`node`", "`edge`", "`condition`", "`}`"];
        if allow_actions {
            stmt_kws.extend(["`create`", "`delete`", "`set`"]);
        }
        loop {
            let sspan = self.span();
            match self.peek().clone() {
                Tok::Sym("}") => {
                    self.bump();
                    return Ok((pat, actions));
                }
                Tok::Ident(kw) if kw == "node" => {
                    self.bump();
                    let name = self.ident()?;
                    self.expect_sym(":")?;
                    let ty = self.ident()?;
                    self.expect_sym(";")?;
                    pat.nodes.push(NodeDecl { name, ty, span: sspan });
                }
                Tok::Ident(kw) if kw == "edge" => {
                    self.bump();
                    let first = self.ident()?;
                    let (name, ty) = if self.eat_sym(":") { (Some(first), self.ident()?) } else { (None, first) };
                    let (src, tgt) = self.endpoints()?;
                    self.expect_sym(";")?;
                    pat.edges.push(EdgeDecl { name, ty, src, tgt, span: sspan });
                }
                Tok::Ident(kw) if kw == "condition" => {
                    self.bump();
                    let e = self.expr()?;
                    self.expect_sym(";")?;
                    pat.conditions.push(e);
                }
                Tok::Ident(kw) if allow_actions && kw == "create" => {
                    self.bump();
                    if self.is_kw("node") {
                        self.bump();
                        let name = self.ident()?;
                        self.expect_sym(":")?;
                        let ty = self.ident()?;
                        let mut attrs = Vec::new();
                        if self.eat_sym("{") {
                            if !self.is_sym("}") {
                                loop {
                                    let a = self.ident()?;
                                    self.expect_sym("=")?;
                                    attrs.push((a, self.expr()?));
                                    if !self.eat_sym(",") {
                                        break;
                                    }
                                }
                            }
                            self.expect_sym("}")?;
                        }
                        self.expect_sym(";")?;
                        actions.push(ActionDecl::CreateNode { name, ty, attrs, span: sspan });
                    } else if self.is_kw("edge") {
                        self.bump();
                        let ty = self.ident()?;
                        let (src, tgt) = self.endpoints()?;
                        self.expect_sym(";")?;
                        actions.push(ActionDecl::CreateEdge { ty, src, tgt, span: sspan });
                    } else {
                        return self.error(&["`node`", "`edge`"]);
                    }
                }
                Tok::Ident(kw) if allow_actions && kw == "delete" => {
                    self.bump();
                    let is_node = if self.is_kw("node") {
                        true
                    } else if self.is_kw("edge") {
                        false
                    } else {
                        return self.error(&["`node`", "`edge`"]);
                    };
                    self.bump();
                    let name = self.ident()?;
                    self.expect_sym(";")?;
                    actions.push(if is_node {
                        ActionDecl::DeleteNode { name, span: sspan }
                    } else {
                        ActionDecl::DeleteEdge { name, span: sspan }
                    });
                }
                Tok::Ident(kw) if allow_actions && kw == "set" => {
                    self.bump();
                    let node = self.ident()?;
                    self.expect_sym(".")?;
                    let attr = self.ident()?;
                    self.expect_sym("=")?;
                    let value = self.expr()?;
                    self.expect_sym(";")?;
                    actions.push(ActionDecl::SetAttr { node, attr, value, span: sspan });
                }
                _ => return self.error(&stmt_kws),
            }
        }
    }

    fn endpoints(&mut self) -> Result<(String, String), GipslError> {
        self.expect_sym("(")?;
        let src = self.ident()?;
        self.expect_sym("->")?;
        let tgt = self.ident()?;
        self.expect_sym(")")?;
        Ok((src, tgt))
    }

    pub fn expr(&mut self) -> Result<Expr, GipslError> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        let Tok::Sym(s) = self.peek() else { return None };
        Some(match *s {
            "|" => BinaryOp::Or,
            "&" => BinaryOp::And,
            "==" => BinaryOp::Eq,
            "!=" => BinaryOp::Ne,
            "<" => BinaryOp::Lt,
            "<=" => BinaryOp::Le,
            ">" => BinaryOp::Gt,
            ">=" => BinaryOp::Ge,
            "+" => BinaryOp::Add,
            "-" => BinaryOp::Sub,
            "*" => BinaryOp::Mul,
            "/" => BinaryOp::Div,
            _ => return None,
        })
    }

    /// Precedence climbing; all binary operators are left-associative.
    fn binary(&mut self, min_prec: u8) -> Result<Expr, GipslError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let span = self.bump().span;
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, GipslError> {
        let span = self.span();
        if self.eat_sym("!") {
            let e = self.unary()?;
            return Ok(Expr::new(ExprKind::Unary(UnaryOp::Not, Box::new(e)), span));
        }
        if self.is_sym("-") {
            // a minus directly followed by a literal is part of the literal
            match self.peek_at(1).clone() {
                Tok::Int(i) => {
                    self.bump();
                    self.bump();
                    return Ok(Expr::new(ExprKind::Int(-i), span));
                }
                Tok::Real(r) => {
                    self.bump();
                    self.bump();
                    return Ok(Expr::new(ExprKind::Real(-r), span));
                }
                _ => {
                    self.bump();
                    let e = self.unary()?;
                    return Ok(Expr::new(ExprKind::Unary(UnaryOp::Neg, Box::new(e)), span));
                }
            }
        }
        if let Tok::Ident(name) = self.peek() {
            if let Some(&(_, op)) = UNARY_FUNCS.iter().find(|(n, _)| n == name) {
                self.bump();
                let e = self.unary()?;
                return Ok(Expr::new(ExprKind::Unary(op, Box::new(e)), span));
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, GipslError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int(i), span))
            }
            Tok::Real(r) => {
                self.bump();
                Ok(Expr::new(ExprKind::Real(r), span))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::new(ExprKind::Str(s), span))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "true" | "True" => {
                    self.bump();
                    Ok(Expr::new(ExprKind::Bool(true), span))
                }
                "false" | "False" => {
                    self.bump();
                    Ok(Expr::new(ExprKind::Bool(false), span))
                }
                "mappings" => self.set_expr(),
                "self" => {
                    self.bump();
                    self.path_tail(PathRoot::SelfRef, span)
                }
                _ => {
                    self.bump();
                    self.path_tail(PathRoot::Var(name), span)
                }
            },
            _ => self.error(&["expression"]),
        }
    }

    fn path_tail(&mut self, root: PathRoot, span: Span) -> Result<Expr, GipslError> {
        let mut path = Path { root, node: None, attr: None, value: false };
        if self.is_sym(".") {
            self.bump();
            let member = self.ident()?;
            match member.as_str() {
                "nodes" => {
                    self.expect_sym("(")?;
                    self.expect_sym(")")?;
                    self.expect_sym(".")?;
                    path.node = Some(self.ident()?);
                    if self.eat_sym(".") {
                        path.attr = Some(self.ident()?);
                    }
                }
                "value" => {
                    self.expect_sym("(")?;
                    self.expect_sym(")")?;
                    path.value = true;
                }
                _ => path.attr = Some(member),
            }
        }
        Ok(Expr::new(ExprKind::Path(path), span))
    }

    fn set_expr(&mut self) -> Result<Expr, GipslError> {
        let span = self.bump().span;
        self.expect_sym(".")?;
        let mapping = self.ident()?;
        self.expect_sym("->")?;
        let mut filter = None;
        if self.is_kw("filter") {
            self.bump();
            filter = Some(self.lambda()?);
            self.expect_sym("->")?;
        }
        if !self.is_kw("sum") {
            return self.error(if filter.is_some() { &["`sum`"] } else { &["`filter`", "`sum`"] });
        }
        self.bump();
        let sum = self.lambda()?;
        Ok(Expr::new(ExprKind::Set(Box::new(SetExpr { mapping, filter, sum })), span))
    }

    fn lambda(&mut self) -> Result<Lambda, GipslError> {
        self.expect_sym("(")?;
        let var = self.ident()?;
        self.expect_sym("|")?;
        let body = self.expr()?;
        self.expect_sym(")")?;
        Ok(Lambda { var, body })
    }
}
