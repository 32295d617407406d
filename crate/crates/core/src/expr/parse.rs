use super::{Expression, Func, Node};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token {
                tok,
                line: tl,
                column: tc,
            });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            let mut integral = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                integral = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    integral = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s
                .parse()
                .map_err(|_| err(tl, tc, format!("malformed number '{}'", s)))?;
            col += i - start;
            out.push(Token {
                tok: Tok::Num(v, integral),
                line: tl,
                column: tc,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(s),
                line: tl,
                column: tc,
            });
            continue;
        }
        return Err(err(tl, tc, format!("unexpected character '{}'", c)));
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        let t = self.next();
        if t.tok == tok {
            Ok(())
        } else {
            Err(err(t.line, t.column, format!("expected {}", what)))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    lhs = Node::add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.next();
                    lhs = Node::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.next();
                    lhs = Node::mul(lhs, self.unary()?);
                }
                Tok::Slash => {
                    self.next();
                    lhs = Node::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.peek().tok == Tok::Minus {
            self.next();
            return Ok(Node::neg(self.unary()?));
        }
        if self.peek().tok == Tok::Plus {
            self.next();
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.peek().tok == Tok::Caret {
            self.next();
            let t = self.next();
            match t.tok {
                Tok::Num(v, true) if v <= u32::MAX as f64 => Ok(Node::pow(base, v as u32)),
                _ => Err(err(
                    t.line,
                    t.column,
                    "exponent must be a non-negative integer literal",
                )),
            }
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Node> {
        let t = self.next();
        match t.tok {
            Tok::Num(v, _) => Ok(Node::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(&name, t.line, t.column),
            Tok::End => Err(err(t.line, t.column, "unexpected end of input")),
            other => Err(err(t.line, t.column, format!("unexpected token {:?}", other))),
        }
    }

    fn ident(&mut self, name: &str, line: usize, column: usize) -> Result<Node> {
        if let Some(rest) = name.strip_prefix('x') {
            if let Ok(k) = rest.parse::<usize>() {
                if !rest.starts_with('0') && (1..=16).contains(&k) {
                    if k > self.dim {
                        return Err(err(
                            line,
                            column,
                            format!("variable {} exceeds dimension {}", name, self.dim),
                        ));
                    }
                    return Ok(Node::Var(k - 1));
                }
            }
        }
        let unary = match name {
            "abs" => Some(Func::Abs),
            "sign" => Some(Func::Sign),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        };
        if let Some(f) = unary {
            self.expect(Tok::LParen, "'(' after function name")?;
            let a = self.expr()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(Node::func(f, a));
        }
        if name == "min" || name == "max" {
            self.expect(Tok::LParen, "'(' after function name")?;
            let a = self.expr()?;
            self.expect(Tok::Comma, "','")?;
            let b = self.expr()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(if name == "min" {
                Node::min(a, b)
            } else {
                Node::max(a, b)
            });
        }
        Err(err(line, column, format!("unknown identifier '{}'", name)))
    }
}

/// Parses `text` as an expression in the variables `x1..x{dim}`.
pub fn parse(text: &str, dim: usize) -> Result<Expression> {
    if dim > 16 {
        return Err(Error::Invalid(format!("dimension {} exceeds 16", dim)));
    }
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, dim };
    let root = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return Err(err(t.line, t.column, "unexpected trailing input"));
    }
    Expression::new(root, dim)
}
