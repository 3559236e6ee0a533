//! Text files for finite algebras.
//!
//! Table style lists every `m i j k = v`; Hasse style lists `cover i < j` and the
//! operation is synthesized from the order. Both accept `elements`, `const name = v`,
//! `box i = v` and `#` comments. Element tokens are looked up by name first, then
//! as 0-based indices.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::algebra::{from_hasse, FiniteAlgebra};
use crate::error::{Error, Result};

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::File { line, msg: msg.into() }
}

struct Header {
    names: Vec<String>,
    lookup: BTreeMap<String, usize>,
}

impl Header {
    fn element(&self, tok: &str, line: usize) -> Result<usize> {
        if let Some(&i) = self.lookup.get(tok) {
            return Ok(i);
        }
        match tok.parse::<usize>() {
            Ok(i) if i < self.names.len() => Ok(i),
            _ => Err(err(line, format!("unknown element `{tok}`"))),
        }
    }
}

pub fn parse_algebra(text: &str) -> Result<FiniteAlgebra> {
    let mut size: Option<usize> = None;
    let mut header: Option<Header> = None;
    let mut cells: BTreeMap<(usize, usize, usize), (usize, usize)> = BTreeMap::new();
    let mut covers = Vec::new();
    let mut constants = BTreeMap::new();
    let mut box_entries: BTreeMap<usize, usize> = BTreeMap::new();
    let mut first_body_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks[0] {
            "size" => {
                if size.is_some() {
                    return Err(err(line, "duplicate `size` line"));
                }
                let [_, n] = toks[..] else { return Err(err(line, "expected `size N`")) };
                let n: usize = n.parse().map_err(|_| err(line, format!("bad size `{n}`")))?;
                if n == 0 {
                    return Err(err(line, "size must be positive"));
                }
                if n > crate::algebra::MAX_SIZE {
                    return Err(err(line, format!("size {n} exceeds {}", crate::algebra::MAX_SIZE)));
                }
                size = Some(n);
                continue;
            }
            "elements" => {
                let n = size.ok_or_else(|| err(line, "`elements` before `size`"))?;
                if header.is_some() || first_body_line != 0 {
                    return Err(err(line, "`elements` must come once, before the body"));
                }
                let names: Vec<String> = toks[1..].iter().map(|s| s.to_string()).collect();
                if names.len() != n {
                    return Err(err(line, format!("expected {n} element names, found {}", names.len())));
                }
                let mut lookup = BTreeMap::new();
                for (i, s) in names.iter().enumerate() {
                    if lookup.insert(s.clone(), i).is_some() {
                        return Err(err(line, format!("element `{s}` listed twice")));
                    }
                }
                header = Some(Header { names, lookup });
                continue;
            }
            _ => {}
        }
        let n = size.ok_or_else(|| err(line, "missing `size` line"))?;
        let h = header
            .get_or_insert_with(|| Header { names: (0..n).map(|i| i.to_string()).collect(), lookup: BTreeMap::new() });
        if first_body_line == 0 {
            first_body_line = line;
        }
        match toks[..] {
            ["m", i, j, k, "=", v] => {
                let key = (h.element(i, line)?, h.element(j, line)?, h.element(k, line)?);
                let v = h.element(v, line)?;
                if let Some(&(old, at)) = cells.get(&key) {
                    if old != v {
                        return Err(err(line, format!("conflicts with the entry on line {at}")));
                    }
                }
                cells.insert(key, (v, line));
            }
            ["cover", i, "<", j] => covers.push((h.element(i, line)?, h.element(j, line)?)),
            ["const", name, "=", v] => {
                if !crate::formulas::is_constant_name(name) {
                    return Err(err(line, format!("`{name}` cannot name a constant")));
                }
                let v = h.element(v, line)?;
                if constants.insert(name.to_string(), v).is_some() {
                    return Err(err(line, format!("constant `{name}` declared twice")));
                }
            }
            ["box", i, "=", v] => {
                let i = h.element(i, line)?;
                let v = h.element(v, line)?;
                if box_entries.insert(i, v).is_some() {
                    return Err(err(line, format!("box of `{}` given twice", h.names[i])));
                }
            }
            _ => return Err(err(line, format!("cannot read `{content}`"))),
        }
    }

    let n = size.ok_or_else(|| err(0, "missing `size` line"))?;
    let names = match header {
        Some(h) => h.names,
        None => (0..n).map(|i| i.to_string()).collect(),
    };
    let box_table = if box_entries.is_empty() {
        None
    } else {
        if box_entries.len() != n {
            return Err(err(first_body_line, format!("box given for {} of {n} elements", box_entries.len())));
        }
        Some(box_entries.into_values().collect())
    };
    if !cells.is_empty() && !covers.is_empty() {
        return Err(err(first_body_line, "mixes `m` lines and `cover` lines"));
    }
    if cells.is_empty() {
        return from_hasse(names, &covers, constants, box_table);
    }
    if cells.len() != n * n * n {
        let missing = (0..n * n * n)
            .map(|c| (c / (n * n), (c / n) % n, c % n))
            .find(|key| !cells.contains_key(key))
            .expect("some cell is missing");
        return Err(err(
            first_body_line,
            format!(
                "table is incomplete: no entry for m {} {} {}",
                names[missing.0], names[missing.1], names[missing.2]
            ),
        ));
    }
    let table = cells.into_values().map(|(v, _)| v).collect();
    FiniteAlgebra::from_table(names, table, constants, box_table)
}

fn write_extras(a: &FiniteAlgebra, out: &mut String) {
    for (c, &v) in a.constants() {
        let _ = writeln!(out, "const {c} = {}", a.name(v));
    }
    if let Some(b) = a.box_table() {
        for (i, &v) in b.iter().enumerate() {
            let _ = writeln!(out, "box {} = {}", a.name(i), a.name(v));
        }
    }
}

fn write_header(a: &FiniteAlgebra, out: &mut String) {
    let _ = writeln!(out, "size {}", a.size());
    let _ = writeln!(out, "elements {}", a.names().join(" "));
}

pub fn write_table(a: &FiniteAlgebra) -> String {
    let mut out = String::new();
    write_header(a, &mut out);
    let n = a.size();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let _ = writeln!(out, "m {} {} {} = {}", a.name(i), a.name(j), a.name(k), a.name(a.m(i, j, k)));
            }
        }
    }
    write_extras(a, &mut out);
    out
}

/// Covering pairs `(lower, upper)` of the derived order.
pub fn covers(a: &FiniteAlgebra) -> Vec<(usize, usize)> {
    let n = a.size();
    let mut out = Vec::new();
    for i in 0..n {
        for j in a.up(i).without(i).iter() {
            let between = a.up(i).intersection(a.down(j)).without(i).without(j);
            if between.is_empty() {
                out.push((i, j));
            }
        }
    }
    out
}

/// Hasse style; only faithful for nearlattices, whose operation is determined by the order.
pub fn write_hasse(a: &FiniteAlgebra) -> Result<String> {
    if !a.is_nearlattice() {
        return Err(Error::NotNearlattice("Hasse style needs a nearlattice".into()));
    }
    let mut out = String::new();
    write_header(a, &mut out);
    for (i, j) in covers(a) {
        let _ = writeln!(out, "cover {} < {}", a.name(i), a.name(j));
    }
    write_extras(a, &mut out);
    Ok(out)
}

fn io(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn located(path: &Path, e: Error) -> Error {
    match e {
        Error::File { line, msg } => Error::File { line, msg: format!("{}: {msg}", path.display()) },
        other => other,
    }
}

pub fn load_algebra(path: &Path) -> Result<FiniteAlgebra> {
    let text = std::fs::read_to_string(path).map_err(|e| io(path, e))?;
    parse_algebra(&text).map_err(|e| located(path, e))
}

/// Loads a directory of `.alg` files in file-name order, a single file, or `path.alg`.
pub fn load_class(path: &Path) -> Result<Vec<FiniteAlgebra>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "alg"))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(Error::EmptyClass);
        }
        return files.iter().map(|p| load_algebra(p)).collect();
    }
    if path.is_file() {
        return Ok(vec![load_algebra(path)?]);
    }
    let mut with_ext = path.as_os_str().to_owned();
    with_ext.push(".alg");
    let with_ext = PathBuf::from(with_ext);
    if with_ext.is_file() {
        return Ok(vec![load_algebra(&with_ext)?]);
    }
    Err(Error::Io(format!("{}: no such file or directory", path.display())))
}

/// Writes each algebra as `size{N}_{k}.alg` (table style) plus `index.txt` with one
/// `size N count K` line per size. Returns the written algebra paths.
pub fn write_catalog(dir: &Path, algebras: &[FiniteAlgebra]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut paths = Vec::new();
    for a in algebras {
        let k = counts.entry(a.size()).or_default();
        *k += 1;
        let p = dir.join(format!("size{}_{:04}.alg", a.size(), k));
        std::fs::write(&p, write_table(a)).map_err(|e| io(&p, e))?;
        paths.push(p);
    }
    let mut index = String::new();
    for (size, count) in &counts {
        let _ = writeln!(index, "size {size} count {count}");
    }
    let p = dir.join("index.txt");
    std::fs::write(&p, index).map_err(|e| io(&p, e))?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::check_distributive;
    use crate::fixtures::{fig1, fig2};

    #[test]
    fn fixtures_parse() {
        let a = fig1();
        assert_eq!(a.size(), 10);
        assert!(a.is_distributive_nearlattice());
        let b = fig2();
        assert_eq!(b.top(), b.index_of("1"));
        assert_eq!(b.constant("bot1"), b.index_of("a"));
        assert!(check_distributive(&b).unwrap().passed());
    }

    #[test]
    fn table_and_hasse_round_trip() {
        for a in [fig1(), fig2(), FiniteAlgebra::chain(3).unwrap()] {
            assert_eq!(parse_algebra(&write_table(&a)).unwrap(), a);
            assert_eq!(parse_algebra(&write_hasse(&a).unwrap()).unwrap(), a);
        }
    }

    #[test]
    fn box_lines_round_trip() {
        let a = fig2().with_box(Some(vec![1, 0, 2, 3])).unwrap();
        let text = write_hasse(&a).unwrap();
        assert!(text.contains("box a = b"));
        assert_eq!(parse_algebra(&text).unwrap(), a);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("size 2\nm 0 0 0 = 0\nm 0 0 1 = 7\n", 3),
            ("size 1\nfoo\n", 2),
            ("m 0 0 0 = 0\n", 1),
            ("size 2\nelements p q\n\ncover p < r\n", 4),
            ("size 1\nconst x0 = 0\n", 2),
            ("size 1\nm 0 0 0 = 0\nm 0 0 0 = 0\nelements z\n", 4),
        ];
        for (text, line) in cases {
            match parse_algebra(text) {
                Err(Error::File { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn incomplete_table_is_reported() {
        let e = parse_algebra("size 2\nm 0 0 0 = 0\n").unwrap_err();
        assert!(matches!(e, Error::File { line: 2, ref msg } if msg.contains("m 0 0 1")), "{e:?}");
    }

    #[test]
    fn names_shadow_indices() {
        // element named `1` sits at index 0
        let a = parse_algebra("size 2\nelements 1 0\ncover 0 < 1\n").unwrap();
        assert!(a.leq(1, 0));
    }

    #[test]
    fn load_class_resolves_extension() {
        let dir = std::env::temp_dir().join(format!("nearlab-format-{}", std::process::id()));
        let written = write_catalog(&dir, &[FiniteAlgebra::chain(1).unwrap(), fig2(), fig1()]).unwrap();
        assert_eq!(written.len(), 3);
        let index = std::fs::read_to_string(dir.join("index.txt")).unwrap();
        assert_eq!(index, "size 1 count 1\nsize 4 count 1\nsize 10 count 1\n");
        assert_eq!(load_class(&dir).unwrap().len(), 3);
        let stem = dir.join("size4_0001");
        assert_eq!(load_class(&stem).unwrap(), vec![fig2()]);
        assert!(matches!(load_class(&dir.join("nothing")), Err(Error::Io(_))));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
