//! Ensemble files.
//!
//! ```text
//! # structmc-ensemble v1 method=<tag> law=<tag> d=<int> s=<int> seed=<uint64>
//! <d comma-separated decimals, 17 significant digits>   (s lines)
//! ```

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::ensembles::{Ensemble, IsotropicLaw, LawTag, Method};
use crate::matrix::Matrix;
use crate::{Error, Result};

const MAGIC: &str = "structmc-ensemble";
const VERSION: &str = "v1";

pub fn write_ensemble<W: Write>(e: &Ensemble, mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "# {MAGIC} {VERSION} method={} law={} d={} s={} seed={}",
        e.method(),
        e.law().tag(),
        e.d(),
        e.s(),
        e.seed()
    )?;
    let mut line = String::new();
    for row in e.rows().rows_iter() {
        line.clear();
        for (k, x) in row.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&format!("{x:.16e}"));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()
}

pub fn save_ensemble(e: &Ensemble, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|err| Error::io(path, err))?;
    write_ensemble(e, BufWriter::new(file)).map_err(|err| Error::io(path, err))
}

pub fn load_ensemble(path: impl AsRef<Path>) -> Result<Ensemble> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|err| Error::io(path, err))?;
    read_ensemble(BufReader::new(file), path)
}

struct Header {
    method: Method,
    law: LawTag,
    d: usize,
    s: usize,
    seed: u64,
}

/// Parses an ensemble from `reader`; `path` only labels error messages.
///
/// Every line, including the last, must end in LF; a missing final newline is
/// reported as truncation.
pub fn read_ensemble<R: BufRead>(mut reader: R, path: &Path) -> Result<Ensemble> {
    let err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut content = String::new();
    reader.read_to_string(&mut content).map_err(|e| Error::io(path, e))?;
    if content.is_empty() {
        return Err(err(1, "empty file, expected a header".into()));
    }
    if !content.ends_with('\n') {
        return Err(err(content.lines().count(), "truncated: last line has no terminating newline".into()));
    }
    let mut lines = content.lines().enumerate();

    let header = match lines.next() {
        Some((_, text)) => parse_header(text).map_err(|msg| err(1, msg))?,
        None => return Err(err(1, "empty file, expected a header".into())),
    };

    let mut data = Vec::with_capacity(header.s * header.d);
    let mut rows = 0usize;
    for (idx, text) in lines {
        let lineno = idx + 1;
        if rows == header.s {
            return Err(err(lineno, format!("header declares s={} but more data rows follow", header.s)));
        }
        let before = data.len();
        for (col, field) in text.split(',').enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| err(lineno, format!("column {}: `{field}` is not a number", col + 1)))?;
            if !v.is_finite() {
                return Err(err(lineno, format!("column {}: non-finite value", col + 1)));
            }
            data.push(v);
        }
        let got = data.len() - before;
        if got != header.d {
            return Err(err(lineno, format!("expected {} values, found {got}", header.d)));
        }
        rows += 1;
    }
    if rows != header.s {
        return Err(err(
            rows + 2,
            format!("row-count mismatch: header declares s={} but the file has {rows} data rows", header.s),
        ));
    }

    let law = IsotropicLaw::new(header.law, header.d).map_err(|e| err(1, e.to_string()))?;
    let block = matches!(header.method, Method::Omc | Method::Bomc).then_some(header.d);
    Ensemble::new(Matrix::from_vec(header.s, header.d, data), header.method, law, header.seed, block)
        .map_err(|e| err(1, e.to_string()))
}

fn parse_header(text: &str) -> std::result::Result<Header, String> {
    let mut tokens = text.split_whitespace();
    if tokens.next() != Some("#") || tokens.next() != Some(MAGIC) {
        return Err(format!("missing `# {MAGIC}` header"));
    }
    match tokens.next() {
        Some(VERSION) => {}
        other => return Err(format!("unsupported version {other:?}, expected {VERSION}")),
    }
    let (mut method, mut law, mut d, mut s, mut seed) = (None, None, None, None, None);
    for tok in tokens {
        let (key, value) = tok.split_once('=').ok_or_else(|| format!("malformed header field `{tok}`"))?;
        let bad = |what: &str| format!("bad {what} `{value}`");
        match key {
            "method" => method = Some(value.parse::<Method>().map_err(|_| bad("method"))?),
            "law" => law = Some(value.parse::<LawTag>().map_err(|_| bad("law"))?),
            "d" => d = Some(value.parse::<usize>().map_err(|_| bad("d"))?),
            "s" => s = Some(value.parse::<usize>().map_err(|_| bad("s"))?),
            "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
            other => return Err(format!("unknown header field `{other}`")),
        }
    }
    let missing = |k: &str| format!("header is missing `{k}=`");
    let header = Header {
        method: method.ok_or_else(|| missing("method"))?,
        law: law.ok_or_else(|| missing("law"))?,
        d: d.ok_or_else(|| missing("d"))?,
        s: s.ok_or_else(|| missing("s"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
    };
    if header.d == 0 || header.s == 0 {
        return Err("d and s must be positive".into());
    }
    Ok(header)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_bomc, sample_iid};
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<Ensemble> {
        read_ensemble(text.as_bytes(), Path::new("mem.csv"))
    }

    fn to_text(e: &Ensemble) -> String {
        let mut buf = Vec::new();
        write_ensemble(e, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn header_layout() {
        let law = IsotropicLaw::new(LawTag::MaternSpectral { nu: 1.5 }, 2).unwrap();
        let e = sample_iid(&law, 1, 18_446_744_073_709_551_615).unwrap();
        let text = to_text(&e);
        let first = text.lines().next().unwrap();
        assert_eq!(first, "# structmc-ensemble v1 method=mc law=matern:1.5 d=2 s=1 seed=18446744073709551615");
        assert!(text.ends_with('\n') && !text.contains('\r'));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        let e = sample_bomc(&IsotropicLaw::gaussian(4), 6, 3).unwrap();
        save_ensemble(&e, &path).unwrap();
        let back = load_ensemble(&path).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let e = sample_iid(&IsotropicLaw::gaussian(3), 3, 1).unwrap();
        let text = to_text(&e);
        let cut = &text[..text.len() - 10];
        match parse(cut) {
            Err(Error::Parse { line: 4, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_rows_are_counted() {
        let text = "# structmc-ensemble v1 method=mc law=gaussian d=2 s=3 seed=1\n1,2\n3,4\n";
        // cut on a line boundary
        match parse(text) {
            Err(Error::Parse { msg, .. }) => assert!(msg.contains("row-count"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse(""), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("# other v1\n"), Err(Error::Parse { line: 1, .. })));
        let extra = "# structmc-ensemble v1 method=mc law=gaussian d=1 s=1 seed=1\n1\n2\n";
        assert!(matches!(parse(extra), Err(Error::Parse { line: 3, .. })));
        let nan = "# structmc-ensemble v1 method=mc law=gaussian d=1 s=1 seed=1\nNaN\n";
        assert!(matches!(parse(nan), Err(Error::Parse { line: 2, .. })));
        let junk = "# structmc-ensemble v1 method=mc law=gaussian d=2 s=1 seed=1\n1,x\n";
        assert!(matches!(parse(junk), Err(Error::Parse { line: 2, .. })));
        let unknown = "# structmc-ensemble v1 method=mc law=gaussian d=1 s=1 seed=1 speed=9\n1\n";
        assert!(matches!(parse("# structmc-ensemble v1 method=mc law=gaussian d=1 s=1 seed=1\n1"), Err(Error::Parse { .. })));
        assert!(matches!(parse(unknown), Err(Error::Parse { line: 1, .. })));
    }

    proptest! {
        #[test]
        fn text_round_trip_is_bit_exact(
            values in prop::collection::vec(-1e300f64..1e300, 1..40),
            seed in any::<u64>(),
        ) {
            let d = 1 + values.len() % 4;
            let s = values.len() / d;
            prop_assume!(s >= 1);
            let rows = Matrix::from_vec(s, d, values[..s * d].to_vec());
            let e = Ensemble::new(rows, Method::OptNomc, IsotropicLaw::sphere(d), seed, None).unwrap();
            let back = parse(&to_text(&e)).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
