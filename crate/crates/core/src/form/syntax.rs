//! Lexer, recursive-descent parser and canonical printer for form files.
//!
//! ```text
//! file        := { stmt } ;
//! stmt        := ident "=" rhs ;
//! rhs         := element_decl | "BasisFunction(" ident ")" | "Function(" ident ")"
//!              | "Index()" | form_expr ;
//! element_decl:= ("FiniteElement" | "VectorElement") "(" string "," string "," integer ")" ;
//! form_expr   := ["-"] term { ("+" | "-") term } ;
//! term        := unary { "*" unary | "/" number } ;
//! unary       := "-" unary | factor ;
//! factor      := (number | ident | "(" form_expr ")" | "dx") { postfix } ;
//! postfix     := "[" idx "]" | ".dx(" idx ")" ;
//! idx         := ident | integer ;
//! ```

use std::fmt;

use super::FormError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number { value: f64, integer: Option<usize> },
    Str(String),
    Eq,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier '{s}'"),
            Tok::Number { value, .. } => write!(f, "number {value}"),
            Tok::Str(s) => write!(f, "string \"{s}\""),
            Tok::Eof => f.write_str("end of input"),
            other => {
                let s = match other {
                    Tok::Eq => "=",
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBracket => "[",
                    Tok::RBracket => "]",
                    Tok::Comma => ",",
                    Tok::Dot => ".",
                    Tok::Plus => "+",
                    Tok::Minus => "-",
                    Tok::Star => "*",
                    _ => "/",
                };
                write!(f, "'{s}'")
            }
        }
    }
}

fn syntax_error(pos: Pos, message: impl Into<String>) -> FormError {
    FormError::Syntax { line: pos.line, col: pos.col, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, FormError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut integer = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                integer = false;
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
                    integer = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let value: f64 = s.parse().map_err(|_| syntax_error(pos, format!("malformed number '{s}'")))?;
            Tok::Number { value, integer: if integer { s.parse().ok() } else { None } }
        } else if c == '"' {
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if i >= chars.len() || chars[i] != '"' {
                return Err(syntax_error(pos, "unterminated string"));
            }
            i += 1;
            Tok::Str(chars[start + 1..i - 1].iter().collect())
        } else {
            i += 1;
            match c {
                '=' => Tok::Eq,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                other => return Err(syntax_error(pos, format!("unexpected character '{other}'"))),
            }
        };
        col += i - start;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// Index written in a postfix `[..]` or `.dx(..)`.
#[derive(Clone, Debug, PartialEq)]
pub enum SynIndex {
    Name(String, Pos),
    Literal(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SynExpr {
    Number(f64),
    Name(String, Pos),
    Measure(Pos),
    Neg(Box<SynExpr>),
    Add(Box<SynExpr>, Box<SynExpr>),
    Sub(Box<SynExpr>, Box<SynExpr>),
    Mul(Box<SynExpr>, Box<SynExpr>),
    Div(Box<SynExpr>, f64),
    Component(Box<SynExpr>, SynIndex),
    Derivative(Box<SynExpr>, SynIndex),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementDecl {
    pub vector: bool,
    pub family: String,
    pub shape: String,
    pub degree: usize,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rhs {
    Element(ElementDecl),
    BasisFunction(String, Pos),
    Function(String, Pos),
    Index,
    Expr(SynExpr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statement {
    pub name: String,
    pub pos: Pos,
    pub rhs: Rhs,
}

/// A parsed form file, before name resolution.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FormFile {
    pub statements: Vec<Statement>,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Pos, FormError> {
        let (tok, pos) = self.bump();
        if tok == want {
            Ok(pos)
        } else {
            Err(syntax_error(pos, format!("expected {want}, found {tok}")))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), FormError> {
        match self.bump() {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (tok, pos) => Err(syntax_error(pos, format!("expected identifier, found {tok}"))),
        }
    }

    fn file(&mut self) -> Result<FormFile, FormError> {
        let mut statements = Vec::new();
        while *self.peek() != Tok::Eof {
            statements.push(self.statement()?);
        }
        Ok(FormFile { statements })
    }

    fn statement(&mut self) -> Result<Statement, FormError> {
        let (name, pos) = self.ident()?;
        self.expect(Tok::Eq)?;
        let rhs = self.rhs()?;
        Ok(Statement { name, pos, rhs })
    }

    fn rhs(&mut self) -> Result<Rhs, FormError> {
        if let (Tok::Ident(kw), Tok::LParen) = (self.peek().clone(), self.peek2().clone()) {
            match kw.as_str() {
                "FiniteElement" | "VectorElement" => {
                    let pos = self.pos();
                    self.bump();
                    self.bump();
                    let family = self.string()?;
                    self.expect(Tok::Comma)?;
                    let shape = self.string()?;
                    self.expect(Tok::Comma)?;
                    let degree = match self.bump() {
                        (Tok::Number { integer: Some(n), .. }, _) => n,
                        (tok, pos) => return Err(syntax_error(pos, format!("expected integer degree, found {tok}"))),
                    };
                    self.expect(Tok::RParen)?;
                    return Ok(Rhs::Element(ElementDecl { vector: kw == "VectorElement", family, shape, degree, pos }));
                }
                "BasisFunction" | "Function" => {
                    self.bump();
                    self.bump();
                    let (element, pos) = self.ident()?;
                    self.expect(Tok::RParen)?;
                    return Ok(if kw == "BasisFunction" {
                        Rhs::BasisFunction(element, pos)
                    } else {
                        Rhs::Function(element, pos)
                    });
                }
                "Index" => {
                    self.bump();
                    self.bump();
                    self.expect(Tok::RParen)?;
                    return Ok(Rhs::Index);
                }
                _ => {}
            }
        }
        Ok(Rhs::Expr(self.expr()?))
    }

    fn string(&mut self) -> Result<String, FormError> {
        match self.bump() {
            (Tok::Str(s), _) => Ok(s),
            (tok, pos) => Err(syntax_error(pos, format!("expected string, found {tok}"))),
        }
    }

    fn expr(&mut self) -> Result<SynExpr, FormError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = SynExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = SynExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<SynExpr, FormError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = SynExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    match self.bump() {
                        (Tok::Number { value, .. }, _) => lhs = SynExpr::Div(Box::new(lhs), value),
                        (tok, pos) => {
                            return Err(syntax_error(pos, format!("division is only allowed by a number, found {tok}")))
                        }
                    }
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<SynExpr, FormError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(SynExpr::Neg(Box::new(self.unary()?)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<SynExpr, FormError> {
        let (tok, pos) = self.bump();
        let mut e = match tok {
            Tok::Number { value, .. } => SynExpr::Number(value),
            Tok::Ident(s) if s == "dx" => SynExpr::Measure(pos),
            Tok::Ident(s) => SynExpr::Name(s, pos),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                inner
            }
            tok => return Err(syntax_error(pos, format!("expected an expression, found {tok}"))),
        };
        loop {
            match self.peek() {
                Tok::LBracket => {
                    self.bump();
                    let idx = self.index()?;
                    self.expect(Tok::RBracket)?;
                    e = SynExpr::Component(Box::new(e), idx);
                }
                Tok::Dot => {
                    self.bump();
                    let (name, pos) = self.ident()?;
                    if name != "dx" {
                        return Err(syntax_error(pos, format!("unknown method '.{name}', only '.dx' is supported")));
                    }
                    self.expect(Tok::LParen)?;
                    let idx = self.index()?;
                    self.expect(Tok::RParen)?;
                    e = SynExpr::Derivative(Box::new(e), idx);
                }
                _ => return Ok(e),
            }
        }
    }

    fn index(&mut self) -> Result<SynIndex, FormError> {
        match self.bump() {
            (Tok::Ident(s), pos) => Ok(SynIndex::Name(s, pos)),
            (Tok::Number { integer: Some(n), .. }, _) => Ok(SynIndex::Literal(n)),
            (tok, pos) => Err(syntax_error(pos, format!("expected index name or integer, found {tok}"))),
        }
    }
}

/// Parse form-file text into statements.
pub fn parse(text: &str) -> Result<FormFile, FormError> {
    let toks = lex(text)?;
    Parser { toks, at: 0 }.file()
}

// Precedence levels for printing: sum < product < unary < postfix.
fn precedence(e: &SynExpr) -> u8 {
    match e {
        SynExpr::Add(..) | SynExpr::Sub(..) => 0,
        SynExpr::Mul(..) | SynExpr::Div(..) => 1,
        SynExpr::Neg(_) => 2,
        _ => 3,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &SynExpr, min: u8) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for SynIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynIndex::Name(s, _) => f.write_str(s),
            SynIndex::Literal(n) => write!(f, "{n}"),
        }
    }
}

impl fmt::Display for SynExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynExpr::Number(v) => write!(f, "{v:?}"),
            SynExpr::Name(s, _) => f.write_str(s),
            SynExpr::Measure(_) => f.write_str("dx"),
            SynExpr::Neg(e) => {
                f.write_str("-")?;
                write_child(f, e, 2)
            }
            SynExpr::Add(a, b) | SynExpr::Sub(a, b) => {
                write_child(f, a, 0)?;
                f.write_str(if matches!(self, SynExpr::Add(..)) { " + " } else { " - " })?;
                write_child(f, b, 1)
            }
            SynExpr::Mul(a, b) => {
                write_child(f, a, 1)?;
                f.write_str("*")?;
                write_child(f, b, 2)
            }
            SynExpr::Div(a, v) => {
                write_child(f, a, 1)?;
                write!(f, "/{v:?}")
            }
            SynExpr::Component(e, i) => {
                write_child(f, e, 3)?;
                write!(f, "[{i}]")
            }
            SynExpr::Derivative(e, i) => {
                write_child(f, e, 3)?;
                write!(f, ".dx({i})")
            }
        }
    }
}

impl fmt::Display for FormFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            write!(f, "{} = ", s.name)?;
            match &s.rhs {
                Rhs::Element(e) => {
                    let ctor = if e.vector { "VectorElement" } else { "FiniteElement" };
                    writeln!(f, "{ctor}(\"{}\", \"{}\", {})", e.family, e.shape, e.degree)?;
                }
                Rhs::BasisFunction(el, _) => writeln!(f, "BasisFunction({el})")?,
                Rhs::Function(el, _) => writeln!(f, "Function({el})")?,
                Rhs::Index => writeln!(f, "Index()")?,
                Rhs::Expr(e) => writeln!(f, "{e}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_element_and_expression() {
        let file = parse("element = FiniteElement(\"Lagrange\", \"triangle\", 3)\na = v.dx(i)*u.dx(i)*dx").unwrap();
        assert_eq!(file.statements.len(), 2);
        assert!(matches!(&file.statements[0].rhs, Rhs::Element(e) if e.degree == 3 && !e.vector));
        let Rhs::Expr(e) = &file.statements[1].rhs else { panic!() };
        assert_eq!(e.to_string(), parse_expr("v.dx(i)*u.dx(i)*dx").to_string());
    }

    fn parse_expr(s: &str) -> SynExpr {
        match parse(&format!("x = {s}")).unwrap().statements.remove(0).rhs {
            Rhs::Expr(e) => e,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence_and_printing() {
        let e = parse_expr("0.25*(v[i].dx(j) + v[j].dx(i)) * (u[i].dx(j) + u[j].dx(i)) * dx");
        assert_eq!(e.to_string(), "0.25*(v[i].dx(j) + v[j].dx(i))*(u[i].dx(j) + u[j].dx(i))*dx");
        assert_eq!(parse_expr("a - (b - c)").to_string(), "a - (b - c)");
        assert_eq!(parse_expr("-v*u/2*dx").to_string(), "-v*u/2.0*dx");
        assert_eq!(parse_expr("1e-3*v").to_string(), "0.001*v");
    }

    #[test]
    fn comments_and_whitespace() {
        let file = parse("# header\n  i = Index()   # trailing\n\n j=Index()").unwrap();
        assert_eq!(file.statements.len(), 2);
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse("a = v *\n  * u").unwrap_err();
        assert!(matches!(err, FormError::Syntax { line: 2, col: 3, .. }), "{err:?}");
        let err = parse("a = v.grad(i)").unwrap_err();
        assert!(matches!(err, FormError::Syntax { line: 1, col: 7, .. }), "{err:?}");
        assert!(matches!(parse("a = v / u"), Err(FormError::Syntax { .. })));
        assert!(matches!(parse("e = FiniteElement(\"Lagrange\", \"triangle\")"), Err(FormError::Syntax { .. })));
        assert!(matches!(parse("a = \"open"), Err(FormError::Syntax { .. })));
    }
}
