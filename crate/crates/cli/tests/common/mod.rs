#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::Rng;

pub const EXAMPLE_SIGNED: &[u8] =
    b"\"H1\",H2,\"N1\"\r\n\"Hello,world\",\"green\",3.0\r\nNice to meet you,\"apple\",\"8.0\"";

const WORDS: &[&str] = &[
    "Tokyo",
    "Osaka",
    "北海道",
    "青森県",
    "total",
    "male",
    "female",
    "2009",
    "n/a",
    "",
    "Kyoto",
    "人口",
];

/// An open-data style CSV: a header plus `rows` ragged records mixing
/// numbers, words, thousands separators and the odd embedded quote or
/// line break. Quoting and line endings are chosen at random.
pub fn synthetic_csv(rng: &mut impl Rng, rows: usize) -> Vec<u8> {
    let crlf = rng.gen_bool(0.5);
    let eol = if crlf { "\r\n" } else { "\n" };
    let mut lines = vec!["pref,name,\"year\",value,note".to_owned()];
    for _ in 0..rows {
        let width = rng.gen_range(3..9);
        let cells: Vec<String> = (0..width)
            .map(|_| {
                let raw = match rng.gen_range(0..10) {
                    0 => format!("{},{:03}", rng.gen_range(1..999), rng.gen_range(0..1000)),
                    1 => "say \"hi\"".to_owned(),
                    2 => "line\nbreak".to_owned(),
                    3..=5 => format!("{:.1}", rng.gen_range(0.0..1000.0)),
                    _ => WORDS.choose(rng).unwrap().to_string(),
                };
                let must = raw.contains([',', '"', '\r', '\n']);
                if must || rng.gen_bool(0.3) {
                    format!("\"{}\"", raw.replace('"', "\"\""))
                } else {
                    raw
                }
            })
            .collect();
        lines.push(cells.join(","));
    }
    let mut text = lines.join(eol);
    if rng.gen_bool(0.5) {
        text.push_str(eol);
    }
    text.into_bytes()
}

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_csvsig"))
}

pub fn csvsig(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn csvsig")
}

pub fn code(output: &Output) -> i32 {
    output.status.code().expect("exited normally")
}

pub fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}
