use super::lexer::{lex, Token, TokenKind};
use super::{ByteSpan, Diagnostic, ExtractError, FileParse, RawMethod, SourceFile};

const MODIFIERS: &[&str] = &[
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "native",
    "synchronized",
    "transient",
    "volatile",
    "strictfp",
    "default",
];
const CONTEXTUAL_MODIFIERS: &[&str] = &["sealed", "non"];
const PRIMITIVES: &[&str] = &["boolean", "byte", "char", "short", "int", "long", "float", "double", "void"];

type PResult<T> = Result<T, Failure>;

#[derive(Debug)]
struct Failure {
    offset: usize,
    reason: String,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum TypeKind {
    Class,
    Interface,
    Enum,
    Record,
    Annotation,
}

struct MethodDecl {
    name: String,
    param_names: Vec<String>,
    param_types: Vec<String>,
    return_type: String,
    /// `None` for bodiless declarations.
    body: Option<Vec<String>>,
    span: ByteSpan,
}

#[derive(Default)]
struct ClassContext {
    name: String,
    attributes: Vec<(String, String)>,
    methods: Vec<MethodDecl>,
}

struct Parser<'a> {
    file: &'a SourceFile,
    toks: Vec<Token<'a>>,
    pos: usize,
    diagnostics: Vec<Diagnostic>,
    methods: Vec<RawMethod>,
}

pub(super) fn parse(file: &SourceFile) -> Result<FileParse, ExtractError> {
    let (toks, lex_errors) = lex(&file.content);
    let mut p = Parser { file, toks, pos: 0, diagnostics: Vec::new(), methods: Vec::new() };
    for e in lex_errors {
        p.diag(e.offset, e.reason);
    }
    let found = p.compilation_unit();
    if !found {
        return Err(ExtractError::FileUnparseable {
            path: file.path.clone(),
            offset: 0,
            reason: "no class, interface, enum or record declaration found".to_string(),
        });
    }
    // nested classes finish before their enclosing class
    p.methods.sort_by_key(|m| m.byte_span.start);
    Ok(FileParse { methods: p.methods, diagnostics: p.diagnostics })
}

impl<'a> Parser<'a> {
    fn diag(&mut self, offset: usize, reason: impl Into<String>) {
        self.diagnostics.push(Diagnostic { path: self.file.path.clone(), offset, reason: reason.into() });
    }

    fn peek(&self, ahead: usize) -> Option<&Token<'a>> {
        self.toks.get(self.pos + ahead)
    }

    fn at_punct(&self, c: char) -> bool {
        self.peek_punct(0, c)
    }

    fn peek_punct(&self, ahead: usize, c: char) -> bool {
        self.peek(ahead).is_some_and(|t| t.kind == TokenKind::Punct(c))
    }

    fn at_keyword(&self, word: &str) -> bool {
        self.peek(0).is_some_and(|t| t.kind == TokenKind::Keyword && t.text == word)
    }

    fn at_ident(&self) -> bool {
        self.peek(0).is_some_and(|t| t.kind == TokenKind::Ident)
    }

    fn eof(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn offset(&self) -> usize {
        self.peek(0).map_or(self.file.content.len(), |t| t.start)
    }

    fn fail<T>(&self, reason: impl Into<String>) -> PResult<T> {
        Err(Failure { offset: self.offset(), reason: reason.into() })
    }

    fn expect_punct(&mut self, c: char) -> PResult<()> {
        if self.at_punct(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected `{c}`"))
        }
    }

    fn expect_ident(&mut self) -> PResult<&'a str> {
        match self.peek(0) {
            Some(t) if t.kind == TokenKind::Ident => {
                let text = t.text;
                self.pos += 1;
                Ok(text)
            }
            _ => self.fail("expected identifier"),
        }
    }

    /// Returns whether at least one type declaration was found.
    fn compilation_unit(&mut self) -> bool {
        let mut found = false;
        while !self.eof() {
            if self.at_keyword("package") || self.at_keyword("import") {
                self.skip_past_semicolon();
            } else if let Some(kind) = self.type_decl_ahead() {
                found = true;
                if let Err(f) = self.type_decl(kind) {
                    self.diag(f.offset, f.reason);
                    self.recover_member();
                }
            } else if self.at_punct('@') {
                self.skip_annotation();
            } else {
                self.pos += 1;
            }
        }
        found
    }

    fn skip_past_semicolon(&mut self) {
        while let Some(kind) = self.peek(0).map(|t| t.kind) {
            self.pos += 1;
            if kind == TokenKind::Punct(';') {
                break;
            }
        }
    }

    /// Looks past modifiers and annotations for the start of a type declaration.
    fn type_decl_ahead(&self) -> Option<TypeKind> {
        let mut i = self.pos;
        loop {
            let t = self.toks.get(i)?;
            match t.kind {
                TokenKind::Keyword if MODIFIERS.contains(&t.text) => i += 1,
                TokenKind::Ident if CONTEXTUAL_MODIFIERS.contains(&t.text) => {
                    let next = self.toks.get(i + 1)?;
                    if next.kind == TokenKind::Punct('-') {
                        i += 2;
                    } else if next.kind == TokenKind::Ident || next.kind == TokenKind::Keyword {
                        i += 1;
                    } else {
                        return None;
                    }
                }
                TokenKind::Keyword if t.text == "class" => return Some(TypeKind::Class),
                TokenKind::Keyword if t.text == "interface" => return Some(TypeKind::Interface),
                TokenKind::Keyword if t.text == "enum" => return Some(TypeKind::Enum),
                TokenKind::Ident if t.text == "record" => {
                    let next = self.toks.get(i + 1)?;
                    let after = self.toks.get(i + 2)?;
                    let is_record = next.kind == TokenKind::Ident && matches!(after.kind, TokenKind::Punct('(') | TokenKind::Punct('<'));
                    return is_record.then_some(TypeKind::Record);
                }
                TokenKind::Punct('@') => {
                    let next = self.toks.get(i + 1)?;
                    if next.kind == TokenKind::Keyword && next.text == "interface" {
                        return Some(TypeKind::Annotation);
                    }
                    i = self.annotation_end(i);
                }
                _ => return None,
            }
        }
    }

    /// Index just past the annotation starting at `i` (which is `@`).
    fn annotation_end(&self, mut i: usize) -> usize {
        i += 1;
        while let Some(t) = self.toks.get(i) {
            if t.kind == TokenKind::Ident || (t.kind == TokenKind::Keyword && t.text == "interface") {
                i += 1;
                if self.toks.get(i).is_some_and(|t| t.kind == TokenKind::Punct('.')) {
                    i += 1;
                    continue;
                }
            }
            break;
        }
        if self.toks.get(i).is_some_and(|t| t.kind == TokenKind::Punct('(')) {
            i = self.balanced_end(i, '(', ')').unwrap_or(self.toks.len());
        }
        i
    }

    fn skip_annotation(&mut self) {
        self.pos = self.annotation_end(self.pos);
    }

    /// Index just past the closer matching the opener at `i`.
    fn balanced_end(&self, i: usize, open: char, close: char) -> Option<usize> {
        let mut depth = 0usize;
        for (j, t) in self.toks.iter().enumerate().skip(i) {
            if t.kind == TokenKind::Punct(open) {
                depth += 1;
            } else if t.kind == TokenKind::Punct(close) {
                depth -= 1;
                if depth == 0 {
                    return Some(j + 1);
                }
            }
        }
        None
    }

    fn skip_modifiers_and_annotations(&mut self) {
        loop {
            let Some(t) = self.peek(0) else { return };
            match t.kind {
                TokenKind::Keyword if MODIFIERS.contains(&t.text) => self.pos += 1,
                TokenKind::Ident if t.text == "sealed" && self.peek(1).is_some_and(|n| n.kind != TokenKind::Punct('(')) => self.pos += 1,
                TokenKind::Ident if t.text == "non" && self.peek_punct(1, '-') => self.pos += 3,
                TokenKind::Punct('@') if !self.peek(1).is_some_and(|n| n.text == "interface") => self.skip_annotation(),
                _ => return,
            }
        }
    }

    fn type_decl(&mut self, kind: TypeKind) -> PResult<()> {
        self.skip_modifiers_and_annotations();
        if kind == TypeKind::Annotation {
            self.pos += 1; // `@`
        }
        self.pos += 1; // class | interface | enum | record | interface
        let name = self.expect_ident()?.to_string();
        let mut ctx = ClassContext { name, ..Default::default() };
        if self.at_punct('<') {
            self.skip_type_args()?;
        }
        if kind == TypeKind::Record && self.at_punct('(') {
            let (names, types) = self.parameters()?;
            ctx.attributes.extend(names.into_iter().zip(types));
        }
        while !self.at_punct('{') {
            if self.eof() || self.at_punct(';') || self.at_punct('}') {
                return self.fail("type declaration without body");
            }
            if self.at_punct('<') {
                self.skip_type_args()?;
            } else {
                self.pos += 1;
            }
        }
        let body_open = self.pos;
        self.pos += 1;
        if kind == TypeKind::Enum {
            self.enum_constants()?;
        }
        let result = self.class_body(&mut ctx, body_open);
        self.emit(ctx);
        result
    }

    fn enum_constants(&mut self) -> PResult<()> {
        loop {
            match self.peek(0) {
                None => return self.fail("unterminated enum body"),
                Some(t) if t.kind == TokenKind::Punct(';') => {
                    self.pos += 1;
                    return Ok(());
                }
                Some(t) if t.kind == TokenKind::Punct('}') => return Ok(()),
                Some(t) if t.kind == TokenKind::Punct('(') => {
                    self.pos = self.balanced_end(self.pos, '(', ')').ok_or_else(|| self.failure("unbalanced `(`"))?
                }
                Some(t) if t.kind == TokenKind::Punct('{') => {
                    self.pos = self.balanced_end(self.pos, '{', '}').ok_or_else(|| self.failure("unbalanced `{`"))?
                }
                Some(_) => self.pos += 1,
            }
        }
    }

    fn failure(&self, reason: &str) -> Failure {
        Failure { offset: self.offset(), reason: reason.to_string() }
    }

    /// Parses members up to and including the closing brace.
    fn class_body(&mut self, ctx: &mut ClassContext, open: usize) -> PResult<()> {
        loop {
            if self.eof() {
                return Err(Failure { offset: self.toks[open].start, reason: format!("unterminated body of `{}`", ctx.name) });
            }
            if self.at_punct('}') {
                self.pos += 1;
                return Ok(());
            }
            if self.at_punct(';') {
                self.pos += 1;
                continue;
            }
            let start = self.pos;
            if let Err(f) = self.member(ctx) {
                let member_offset = self.toks[start].start;
                self.diag(member_offset, f.reason);
                self.recover_member();
            }
        }
    }

    /// Skips to just past the next `;` or balanced `{...}` at member level,
    /// stopping before a `}` that would close the enclosing body.
    fn recover_member(&mut self) {
        let mut parens = 0i32;
        while let Some(t) = self.peek(0) {
            match t.kind {
                TokenKind::Punct('(') | TokenKind::Punct('[') => parens += 1,
                TokenKind::Punct(')') | TokenKind::Punct(']') => parens -= 1,
                TokenKind::Punct(';') if parens <= 0 => {
                    self.pos += 1;
                    return;
                }
                TokenKind::Punct('{') => {
                    self.pos = self.balanced_end(self.pos, '{', '}').unwrap_or(self.toks.len());
                    return;
                }
                TokenKind::Punct('}') => return,
                _ => {}
            }
            self.pos += 1;
        }
    }

    fn member(&mut self, ctx: &mut ClassContext) -> PResult<()> {
        let start = self.pos;
        if self.at_punct('{') || (self.at_keyword("static") && self.peek_punct(1, '{')) {
            if self.at_keyword("static") {
                self.pos += 1;
            }
            self.pos = self.balanced_end(self.pos, '{', '}').ok_or_else(|| self.failure("unterminated initializer"))?;
            return Ok(());
        }
        if let Some(kind) = self.type_decl_ahead() {
            // nested types keep their own context and emit their own records
            return self.type_decl(kind);
        }
        self.skip_modifiers_and_annotations();
        if self.at_punct('<') {
            self.skip_type_args()?;
        }
        // constructors, including compact record constructors
        if self.at_ident() && (self.peek_punct(1, '(') || self.peek_punct(1, '{')) {
            if self.peek_punct(1, '(') {
                self.pos += 1;
                self.parameters()?;
            } else {
                self.pos += 1;
            }
            self.skip_throws()?;
            self.pos = self.balanced_end(self.pos, '{', '}').ok_or_else(|| self.failure("unterminated constructor body"))?;
            return Ok(());
        }

        let ty = self.type_name()?;
        let name = self.expect_ident()?;
        if self.at_punct('(') {
            let (param_names, param_types) = self.parameters()?;
            self.skip_dims();
            self.skip_throws()?;
            let body = if self.at_punct('{') {
                let end = self.balanced_end(self.pos, '{', '}').ok_or_else(|| self.failure("unterminated method body"))?;
                let idents = self.body_identifiers(self.pos + 1, end - 1);
                self.pos = end;
                Some(idents)
            } else if self.at_punct(';') {
                self.pos += 1;
                None
            } else if self.at_keyword("default") {
                self.skip_past_semicolon();
                None
            } else {
                return self.fail("expected method body or `;`");
            };
            let end = self.toks[self.pos - 1].end;
            ctx.methods.push(MethodDecl {
                name: name.to_string(),
                param_names,
                param_types,
                return_type: ty,
                body,
                span: ByteSpan { start: self.toks[start].start, end },
            });
            return Ok(());
        }

        // field declarators: name [dims] [= init] {, name [dims] [= init]} ;
        let mut declarator = name;
        loop {
            self.skip_dims();
            ctx.attributes.push((declarator.to_string(), ty.clone()));
            if self.at_punct('=') {
                self.pos += 1;
                self.skip_initializer()?;
            }
            if self.at_punct(',') {
                self.pos += 1;
                declarator = self.expect_ident()?;
            } else {
                return self.expect_punct(';');
            }
        }
    }

    fn skip_throws(&mut self) -> PResult<()> {
        if self.at_keyword("throws") {
            self.pos += 1;
            loop {
                self.type_name()?;
                if self.at_punct(',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        Ok(())
    }

    fn skip_dims(&mut self) {
        while self.at_punct('[') && self.peek_punct(1, ']') {
            self.pos += 2;
        }
    }

    /// Parses a type and returns its raw name: the last identifier of a
    /// qualified name, without type arguments or array dimensions.
    fn type_name(&mut self) -> PResult<String> {
        while self.at_punct('@') {
            self.skip_annotation();
        }
        let name = match self.peek(0).map(|t| (t.kind, t.text)) {
            Some((TokenKind::Keyword, text)) if PRIMITIVES.contains(&text) => {
                self.pos += 1;
                text.to_string()
            }
            Some((TokenKind::Ident, text)) => {
                let mut last = text;
                self.pos += 1;
                loop {
                    if self.at_punct('<') {
                        self.skip_type_args()?;
                    }
                    if self.at_punct('.') && self.peek(1).is_some_and(|n| n.kind == TokenKind::Ident) {
                        last = self.peek(1).unwrap().text;
                        self.pos += 2;
                    } else {
                        break;
                    }
                }
                last.to_string()
            }
            _ => return self.fail("expected type"),
        };
        self.skip_dims();
        Ok(name)
    }

    fn skip_type_args(&mut self) -> PResult<()> {
        match self.type_args_end(self.pos) {
            Some(end) => {
                self.pos = end;
                Ok(())
            }
            None => self.fail("malformed type arguments"),
        }
    }

    /// Index just past the `>` closing the type argument list at `i`, if the
    /// tokens there form a plausible type argument list.
    fn type_args_end(&self, i: usize) -> Option<usize> {
        let mut depth = 0usize;
        for (j, t) in self.toks.iter().enumerate().skip(i) {
            match t.kind {
                TokenKind::Punct('<') => depth += 1,
                TokenKind::Punct('>') => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(j + 1);
                    }
                }
                TokenKind::Ident | TokenKind::Keyword => {
                    let allowed =
                        t.kind == TokenKind::Ident || PRIMITIVES.contains(&t.text) || matches!(t.text, "extends" | "super" | "final");
                    if !allowed {
                        return None;
                    }
                }
                TokenKind::Punct('.' | ',' | '?' | '&' | '[' | ']' | '@') => {}
                _ => return None,
            }
        }
        None
    }

    /// Parses `( ... )` and returns parameter names and raw type names.
    fn parameters(&mut self) -> PResult<(Vec<String>, Vec<String>)> {
        self.expect_punct('(')?;
        let mut names = Vec::new();
        let mut types = Vec::new();
        if self.at_punct(')') {
            self.pos += 1;
            return Ok((names, types));
        }
        loop {
            while self.at_keyword("final") || self.at_punct('@') {
                if self.at_punct('@') {
                    self.skip_annotation();
                } else {
                    self.pos += 1;
                }
            }
            let ty = self.type_name()?;
            if self.peek(0).is_some_and(|t| t.kind == TokenKind::Ellipsis) {
                self.pos += 1;
            }
            if self.at_keyword("this") {
                // receiver parameter
                self.pos += 1;
            } else {
                let name = self.expect_ident()?;
                self.skip_dims();
                names.push(name.to_string());
                types.push(ty);
            }
            if self.at_punct(',') {
                self.pos += 1;
            } else {
                self.expect_punct(')')?;
                return Ok((names, types));
            }
        }
    }

    /// Skips a field initializer, stopping at a top-level `,` or `;`.
    fn skip_initializer(&mut self) -> PResult<()> {
        let mut depth = 0i32;
        while let Some(t) = self.peek(0) {
            match t.kind {
                TokenKind::Punct('(' | '[' | '{') => depth += 1,
                TokenKind::Punct(')' | ']' | '}') => {
                    depth -= 1;
                    if depth < 0 {
                        return self.fail("unbalanced initializer");
                    }
                }
                TokenKind::Punct(',' | ';') if depth == 0 => return Ok(()),
                TokenKind::Punct('<') if depth == 0 && self.pos > 0 && self.toks[self.pos - 1].kind == TokenKind::Ident => {
                    if let Some(end) = self.type_args_end(self.pos) {
                        self.pos = end;
                        continue;
                    }
                }
                _ => {}
            }
            self.pos += 1;
        }
        self.fail("unterminated initializer")
    }

    /// Identifier tokens in `[from, to)`, skipping annotation names.
    fn body_identifiers(&self, from: usize, to: usize) -> Vec<String> {
        let mut out = Vec::new();
        let mut i = from;
        while i < to {
            let t = &self.toks[i];
            if t.kind == TokenKind::Punct('@') && self.toks.get(i + 1).is_some_and(|n| n.kind == TokenKind::Ident) {
                i += 2;
                while i + 1 < to && self.toks[i].kind == TokenKind::Punct('.') && self.toks[i + 1].kind == TokenKind::Ident {
                    i += 2;
                }
                continue;
            }
            if t.kind == TokenKind::Ident {
                out.push(t.text.to_string());
            }
            i += 1;
        }
        out
    }

    fn emit(&mut self, ctx: ClassContext) {
        let all_names: Vec<&str> = ctx.methods.iter().map(|m| m.name.as_str()).collect();
        for (idx, m) in ctx.methods.iter().enumerate() {
            let Some(body) = &m.body else { continue };
            let sibling_names = all_names.iter().enumerate().filter(|&(j, _)| j != idx).map(|(_, n)| n.to_string()).collect();
            self.methods.push(RawMethod {
                name: m.name.clone(),
                param_names: m.param_names.clone(),
                param_types: m.param_types.clone(),
                return_type: m.return_type.clone(),
                body_identifiers: body.clone(),
                class_name: ctx.name.clone(),
                sibling_names,
                attribute_entries: ctx.attributes.clone(),
                project_id: self.file.project_id.clone(),
                path: self.file.path.clone(),
                byte_span: m.span,
            });
        }
    }
}
