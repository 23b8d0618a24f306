use super::ast::*;
use super::lexer::{Token, TokenKind};
use super::{ConsoleError, Span};

/// Recursive-descent parser over a token list.
pub fn parse(tokens: &[Token]) -> Result<Program, ConsoleError> {
    let mut p = Parser { tokens, pos: 0 };
    let mut stmts = Vec::new();
    while let Some(t) = p.peek() {
        if t.kind == TokenKind::Close {
            return Err(ConsoleError::parse(format!("unexpected {t}"), t.span));
        }
        stmts.push(p.stmt()?);
    }
    Ok(Program { stmts })
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

fn join(a: Span, b: Span) -> Span {
    Span { end: b.end, ..a }
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&'t Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    /// Zero-width span just past the last token.
    fn end_span(&self) -> Span {
        match self.tokens.last() {
            Some(t) => Span {
                start: t.span.end,
                end: t.span.end,
                line: t.span.line,
                col: t.span.col + t.text.chars().count() as u32,
            },
            None => Span {
                start: 0,
                end: 0,
                line: 1,
                col: 1,
            },
        }
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos - 1].span
    }

    fn error_here(&self, expected: &str) -> ConsoleError {
        match self.peek() {
            Some(t) => ConsoleError::parse(format!("expected {expected}, found {t}"), t.span),
            None => ConsoleError::parse(format!("expected {expected}"), self.end_span()),
        }
    }

    fn expect_open(&mut self, b: char) -> Result<Span, ConsoleError> {
        match self.peek() {
            Some(t) if t.is_open(b) => {
                self.pos += 1;
                Ok(t.span)
            }
            _ => Err(self.error_here(&b.to_string())),
        }
    }

    fn expect_close(&mut self, b: char) -> Result<Span, ConsoleError> {
        match self.peek() {
            Some(t) if t.is_close(b) => {
                self.pos += 1;
                Ok(t.span)
            }
            _ => Err(self.error_here(&b.to_string())),
        }
    }

    fn name(&mut self) -> Result<String, ConsoleError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Word && !is_keyword(&t.text) => {
                self.pos += 1;
                Ok(t.text.clone())
            }
            _ => Err(self.error_here("a variable name")),
        }
    }

    fn block(&mut self) -> Result<(Vec<Stmt>, Span), ConsoleError> {
        let open = self.expect_open('[')?;
        let mut body = Vec::new();
        loop {
            match self.peek() {
                Some(t) if t.is_close(']') => break,
                Some(t) if t.kind == TokenKind::Close => {
                    return Err(ConsoleError::parse(format!("expected ], found {t}"), t.span))
                }
                Some(_) => body.push(self.stmt()?),
                None => return Err(self.error_here("]")),
            }
        }
        let close = self.expect_close(']')?;
        Ok((body, join(open, close)))
    }

    fn stmt(&mut self) -> Result<Stmt, ConsoleError> {
        let t = self.peek().expect("stmt called at end of input");
        let start = t.span;
        if t.kind == TokenKind::Word {
            let word = t.text.as_str();
            let kind = match word {
                "ask" => {
                    self.pos += 1;
                    let target = self.expr()?;
                    let (body, _) = self.block()?;
                    StmtKind::Ask { target, body }
                }
                "set" | "let" => {
                    self.pos += 1;
                    let name = self.name()?;
                    let value = self.expr()?;
                    if word == "set" {
                        StmtKind::Set { name, value }
                    } else {
                        StmtKind::Let { name, value }
                    }
                }
                _ if word == "crt" || word.starts_with("create-") => {
                    self.pos += 1;
                    let breed = match word.strip_prefix("create-") {
                        Some("") => return Err(ConsoleError::parse("expected a breed after create-", t.span)),
                        Some(b) => Some(b.to_string()),
                        None => None,
                    };
                    let count = self.expr()?;
                    let body = match self.peek() {
                        Some(t) if t.is_open('[') => Some(self.block()?.0),
                        _ => None,
                    };
                    StmtKind::Create { breed, count, body }
                }
                _ if command_arity(word).is_some() => {
                    self.pos += 1;
                    let arity = command_arity(word).unwrap();
                    let args = (0..arity).map(|_| self.expr()).collect::<Result<_, _>>()?;
                    StmtKind::Command {
                        name: word.to_string(),
                        args,
                    }
                }
                _ => StmtKind::Report(self.expr()?),
            };
            return Ok(Stmt {
                kind,
                span: join(start, self.prev_span()),
            });
        }
        let e = self.expr()?;
        Ok(Stmt {
            span: e.span,
            kind: StmtKind::Report(e),
        })
    }

    pub fn expr(&mut self) -> Result<Expr, ConsoleError> {
        self.binary(1)
    }

    fn peek_binop(&self) -> Option<BinOp> {
        let t = self.peek()?;
        match t.kind {
            TokenKind::Op | TokenKind::Word => BinOp::from_token(&t.text),
            _ => None,
        }
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, ConsoleError> {
        let mut left = self.unary()?;
        while let Some(op) = self.peek_binop() {
            if op.precedence() < min_prec {
                break;
            }
            self.pos += 1;
            let right = self.binary(op.precedence() + 1)?;
            left = Expr {
                span: join(left.span, right.span),
                kind: ExprKind::Binary(op, Box::new(left), Box::new(right)),
            };
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Expr, ConsoleError> {
        let op = match self.peek() {
            Some(t) if t.is_word("not") => Some(UnOp::Not),
            Some(t) if t.is_op("-") => Some(UnOp::Neg),
            _ => None,
        };
        match op {
            Some(op) => {
                let start = self.next().unwrap().span;
                let operand = self.unary()?;
                Ok(Expr {
                    span: join(start, operand.span),
                    kind: ExprKind::Unary(op, Box::new(operand)),
                })
            }
            None => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<Expr, ConsoleError> {
        let mut e = self.primary()?;
        loop {
            match self.peek() {
                Some(t) if t.is_word("with") => {
                    self.pos += 1;
                    let pred = self.bracketed()?;
                    e = Expr {
                        span: join(e.span, self.prev_span()),
                        kind: ExprKind::With {
                            set: Box::new(e),
                            pred: Box::new(pred),
                        },
                    };
                }
                Some(t) if t.is_word("in-radius") => {
                    self.pos += 1;
                    let radius = self.primary()?;
                    e = Expr {
                        span: join(e.span, radius.span),
                        kind: ExprKind::InRadius {
                            set: Box::new(e),
                            radius: Box::new(radius),
                        },
                    };
                }
                _ => return Ok(e),
            }
        }
    }

    /// `[ expr ]`
    fn bracketed(&mut self) -> Result<Expr, ConsoleError> {
        self.expect_open('[')?;
        let e = self.expr()?;
        self.expect_close(']')?;
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ConsoleError> {
        let Some(t) = self.peek() else {
            return Err(self.error_here("an expression"));
        };
        match t.kind {
            TokenKind::Number => {
                self.pos += 1;
                let v = t
                    .text
                    .parse::<f64>()
                    .map_err(|_| ConsoleError::parse(format!("bad number {}", t.text), t.span))?;
                Ok(Expr {
                    kind: ExprKind::Number(v),
                    span: t.span,
                })
            }
            TokenKind::Open if t.is_open('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_close(')')?;
                Ok(inner)
            }
            TokenKind::Word => {
                if let Some(sig) = reporter_signature(&t.text) {
                    self.pos += 1;
                    let mut args = Vec::with_capacity(sig.len());
                    for kind in sig {
                        args.push(match kind {
                            ArgKind::Value => Arg::Value(self.unary()?),
                            ArgKind::Block => Arg::Block(self.bracketed()?),
                        });
                    }
                    Ok(Expr {
                        kind: ExprKind::Call {
                            name: t.text.clone(),
                            args,
                        },
                        span: join(t.span, self.prev_span()),
                    })
                } else if is_keyword(&t.text) {
                    Err(self.error_here("an expression"))
                } else {
                    self.pos += 1;
                    Ok(Expr {
                        kind: ExprKind::Var(t.text.clone()),
                        span: t.span,
                    })
                }
            }
            TokenKind::Str => Err(ConsoleError::parse("strings are not supported here", t.span)),
            _ => Err(self.error_here("an expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::console::lexer::tokenize;

    fn p(src: &str) -> Program {
        parse(&tokenize(src).unwrap()).unwrap().without_spans()
    }

    fn err(src: &str) -> ConsoleError {
        parse(&tokenize(src).unwrap()).unwrap_err()
    }

    fn num(v: f64) -> Expr {
        Expr {
            kind: ExprKind::Number(v),
            span: Span::default(),
        }
    }

    fn var(n: &str) -> Expr {
        Expr {
            kind: ExprKind::Var(n.into()),
            span: Span::default(),
        }
    }

    fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr {
            kind: ExprKind::Binary(op, Box::new(l), Box::new(r)),
            span: Span::default(),
        }
    }

    fn report(e: Expr) -> Program {
        Program {
            stmts: vec![Stmt {
                kind: StmtKind::Report(e),
                span: Span::default(),
            }],
        }
    }

    #[test]
    fn the_power_threshold_command() {
        let prog = p("ask nodes with [power < 0.5] [set color green]");
        let StmtKind::Ask { target, body } = &prog.stmts[0].kind else {
            panic!("not an ask: {prog:?}");
        };
        assert_eq!(
            target.kind,
            ExprKind::With {
                set: Box::new(var("nodes")),
                pred: Box::new(bin(BinOp::Lt, var("power"), num(0.5))),
            }
        );
        assert_eq!(
            body[0].kind,
            StmtKind::Set {
                name: "color".into(),
                value: var("green")
            }
        );
    }

    #[test]
    fn unbalanced_bracket_points_at_end() {
        let src = "ask nodes with [power < 0.5] [set color green";
        let e = err(src);
        assert!(e.message.contains("expected ]"), "{}", e.message);
        assert_eq!(e.span.start, src.len());
        assert_eq!(e.span.col as usize, src.len() + 1);
    }

    #[test]
    fn create_with_block() {
        let prog = p("crt 100 [ setxy random-pxcor random-pycor ]");
        let StmtKind::Create { breed, count, body } = &prog.stmts[0].kind else {
            panic!()
        };
        assert_eq!(*breed, None);
        assert_eq!(*count, num(100.0));
        assert_eq!(
            body.as_ref().unwrap()[0].kind,
            StmtKind::Command {
                name: "setxy".into(),
                args: vec![var("random-pxcor"), var("random-pycor")]
            }
        );
        let prog = p("create-towers 5");
        assert!(matches!(&prog.stmts[0].kind, StmtKind::Create { breed: Some(b), body: None, .. } if b == "towers"));
    }

    #[test]
    fn precedence() {
        assert_eq!(
            p("1 + 2 * 3 < 7 and x or y"),
            report(bin(
                BinOp::Or,
                bin(
                    BinOp::And,
                    bin(BinOp::Lt, bin(BinOp::Add, num(1.0), bin(BinOp::Mul, num(2.0), num(3.0))), num(7.0)),
                    var("x")
                ),
                var("y")
            ))
        );
        assert_eq!(
            p("8 - 2 - 1"),
            report(bin(BinOp::Sub, bin(BinOp::Sub, num(8.0), num(2.0)), num(1.0)))
        );
        assert_eq!(p("(1 + 2) * 3"), report(bin(BinOp::Mul, bin(BinOp::Add, num(1.0), num(2.0)), num(3.0))));
    }

    #[test]
    fn call_arguments_bind_tightly() {
        let prog = p("random 140 + 1");
        let StmtKind::Report(Expr {
            kind: ExprKind::Binary(BinOp::Add, l, _),
            ..
        }) = &prog.stmts[0].kind
        else {
            panic!()
        };
        assert!(matches!(&l.kind, ExprKind::Call { name, .. } if name == "random"));
    }

    #[test]
    fn statements_follow_each_other() {
        let prog = p("set color red fd 1 rt 90 count nodes");
        assert_eq!(prog.stmts.len(), 4);
    }

    #[test]
    fn errors_carry_positions() {
        let e = err("set 5 3");
        assert_eq!((e.span.line, e.span.col), (1, 5));
        let e = err("fd");
        assert!(e.message.contains("expected an expression"));
        let e = err("ask nodes fd 1");
        assert!(e.message.contains("expected ["));
        let e = err("]");
        assert_eq!(e.span.col, 1);
        let e = err("count (nodes");
        assert!(e.message.contains("expected )"));
        let e = err("min-one-of nodes who");
        assert!(e.message.contains("expected ["));
    }

    #[test]
    fn empty_program_is_allowed() {
        assert!(p("  ; nothing\n").stmts.is_empty());
    }
}
