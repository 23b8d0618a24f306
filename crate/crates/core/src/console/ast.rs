use super::Span;

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Ask { target: Expr, body: Vec<Stmt> },
    Set { name: String, value: Expr },
    Let { name: String, value: Expr },
    /// `crt` leaves `breed` empty; `create-<plural>` stores the plural.
    Create { breed: Option<String>, count: Expr, body: Option<Vec<Stmt>> },
    Command { name: String, args: Vec<Expr> },
    Report(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge | BinOp::Eq | BinOp::Ne => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }

    pub fn from_token(text: &str) -> Option<Self> {
        Some(match text {
            "or" => BinOp::Or,
            "and" => BinOp::And,
            "<" => BinOp::Lt,
            ">" => BinOp::Gt,
            "<=" => BinOp::Le,
            ">=" => BinOp::Ge,
            "=" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            _ => return None,
        })
    }

    pub const ALL: [BinOp; 12] = [
        BinOp::Or,
        BinOp::And,
        BinOp::Lt,
        BinOp::Gt,
        BinOp::Le,
        BinOp::Ge,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Number(f64),
    /// Any bare word: variables, built-in reporters, color names, breeds.
    Var(String),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    /// Prefix reporter with a fixed argument list, e.g. `random 140`.
    Call { name: String, args: Vec<Arg> },
    With { set: Box<Expr>, pred: Box<Expr> },
    InRadius { set: Box<Expr>, radius: Box<Expr> },
}

/// Reporter argument: a plain value or a bracketed block evaluated per agent.
#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Value(Expr),
    Block(Expr),
}

impl Arg {
    pub fn expr(&self) -> &Expr {
        match self {
            Arg::Value(e) | Arg::Block(e) => e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgKind {
    Value,
    Block,
}

/// Prefix reporters and their argument shapes.
pub fn reporter_signature(name: &str) -> Option<&'static [ArgKind]> {
    use ArgKind::*;
    Some(match name {
        "random" | "random-float" | "count" | "one-of" | "abs" | "sqrt" | "floor" | "round"
        | "turtle" => &[Value],
        "min-one-of" | "max-one-of" => &[Value, Block],
        _ => return None,
    })
}

/// Commands and their argument counts.
pub fn command_arity(name: &str) -> Option<usize> {
    Some(match name {
        "fd" | "forward" | "bk" | "back" | "rt" | "right" | "lt" | "left" => 1,
        "setxy" => 2,
        "die" | "ca" | "clear-all" => 0,
        _ => return None,
    })
}

/// Words that can never name a variable.
pub fn is_keyword(word: &str) -> bool {
    matches!(word, "ask" | "set" | "let" | "crt" | "with" | "in-radius" | "and" | "or" | "not")
        || word.starts_with("create-")
        || reporter_signature(word).is_some()
        || command_arity(word).is_some()
}

impl Program {
    /// Copy with every span zeroed, for structural comparison.
    pub fn without_spans(&self) -> Program {
        Program {
            stmts: self.stmts.iter().map(Stmt::without_spans).collect(),
        }
    }
}

impl Stmt {
    fn without_spans(&self) -> Stmt {
        let block = |b: &Vec<Stmt>| b.iter().map(Stmt::without_spans).collect::<Vec<_>>();
        let kind = match &self.kind {
            StmtKind::Ask { target, body } => StmtKind::Ask {
                target: target.without_spans(),
                body: block(body),
            },
            StmtKind::Set { name, value } => StmtKind::Set {
                name: name.clone(),
                value: value.without_spans(),
            },
            StmtKind::Let { name, value } => StmtKind::Let {
                name: name.clone(),
                value: value.without_spans(),
            },
            StmtKind::Create { breed, count, body } => StmtKind::Create {
                breed: breed.clone(),
                count: count.without_spans(),
                body: body.as_ref().map(block),
            },
            StmtKind::Command { name, args } => StmtKind::Command {
                name: name.clone(),
                args: args.iter().map(Expr::without_spans).collect(),
            },
            StmtKind::Report(e) => StmtKind::Report(e.without_spans()),
        };
        Stmt {
            kind,
            span: Span::default(),
        }
    }
}

impl Expr {
    pub fn without_spans(&self) -> Expr {
        let b = |e: &Expr| Box::new(e.without_spans());
        let kind = match &self.kind {
            ExprKind::Number(v) => ExprKind::Number(*v),
            ExprKind::Var(n) => ExprKind::Var(n.clone()),
            ExprKind::Binary(op, l, r) => ExprKind::Binary(*op, b(l), b(r)),
            ExprKind::Unary(op, e) => ExprKind::Unary(*op, b(e)),
            ExprKind::Call { name, args } => ExprKind::Call {
                name: name.clone(),
                args: args
                    .iter()
                    .map(|a| match a {
                        Arg::Value(e) => Arg::Value(e.without_spans()),
                        Arg::Block(e) => Arg::Block(e.without_spans()),
                    })
                    .collect(),
            },
            ExprKind::With { set, pred } => ExprKind::With { set: b(set), pred: b(pred) },
            ExprKind::InRadius { set, radius } => ExprKind::InRadius {
                set: b(set),
                radius: b(radius),
            },
        };
        Expr {
            kind,
            span: Span::default(),
        }
    }
}
