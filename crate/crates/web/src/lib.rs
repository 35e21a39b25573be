//! Browser bindings. Every export takes strings and returns a JSON string;
//! failures come back as `{"error": "..."}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

use eftlab_core::algorithms::{extract_scalar, fast_two_sum, ModeTriple};
use eftlab_core::conditions::{check, ConditionId};
use eftlab_core::dyadic::Dyadic;
use eftlab_core::format::{pred, succ, ulp, FormatConfig, Fp};
use eftlab_core::rounding::{round, round_down, round_up, RoundingMode};

type Out = Result<Value, String>;

fn respond(r: Out) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn parse_fmt(s: &str) -> Result<FormatConfig, String> {
    s.parse().map_err(|e: eftlab_core::Error| e.to_string())
}

fn parse_dyadic(s: &str) -> Result<Dyadic, String> {
    s.trim().parse().map_err(|e: eftlab_core::Error| e.to_string())
}

fn parse_fp(f: &FormatConfig, s: &str) -> Result<Fp, String> {
    f.to_fp(&parse_dyadic(s)?).map_err(|e| e.to_string())
}

fn parse_triple(s: &str) -> Result<ModeTriple, String> {
    s.parse().map_err(|e: eftlab_core::Error| e.to_string())
}

fn approx(f: &FormatConfig, x: Fp) -> Value {
    match f.value(x) {
        Some(v) => json!(v.to_f64()),
        None if x == Fp::PosInf => json!("inf"),
        None => json!("-inf"),
    }
}

/// Floats from `lo` to `hi` inclusive, at most `cap` of them.
fn run_of_floats(f: &FormatConfig, lo: Fp, hi: Fp, cap: usize) -> Vec<Value> {
    let mut out = Vec::new();
    let mut x = lo;
    while out.len() < cap {
        out.push(json!({ "value": f.ext_value(x), "approx": approx(f, x), "odd": x.is_odd() }));
        if x == hi || x == Fp::PosInf {
            break;
        }
        x = succ(x, f);
    }
    out
}

pub fn round_json(value: &str, fmt: &str) -> Out {
    let f = parse_fmt(fmt)?;
    let r = parse_dyadic(value)?;
    let (down, up) = (round_down(&r, &f), round_up(&r, &f));
    let results: Vec<Value> = RoundingMode::ALL
        .into_iter()
        .map(|m| {
            let x = round(&r, m, &f);
            json!({ "mode": m, "record": f.describe(x), "approx": approx(&f, x) })
        })
        .collect();
    let lo = if down.is_finite() { pred(pred(down, &f), &f) } else { down };
    let hi = if up.is_finite() { succ(succ(up, &f), &f) } else { up };
    Ok(json!({
        "format": f.id(),
        "value": r,
        "approx": r.to_f64(),
        "in_f": f.contains(&r),
        "rd": f.describe(down),
        "ru": f.describe(up),
        "results": results,
        "line": run_of_floats(&f, lo, hi, 16),
    }))
}

pub fn fts_json(a: &str, b: &str, fmt: &str, modes: &str) -> Out {
    let f = parse_fmt(fmt)?;
    let (a, b) = (parse_fp(&f, a)?, parse_fp(&f, b)?);
    let t = fast_two_sum(a, b, parse_triple(modes)?, &f);
    let conditions: Vec<Value> = [
        ConditionId::TheoremFaith2,
        ConditionId::TheoremRto1,
        ConditionId::PriorJeannerod,
        ConditionId::PriorDekker,
    ]
    .into_iter()
    .map(|c| json!({ "condition": c, "holds": check(c, a, b, &f, None).unwrap_or(false) }))
    .collect();
    let mut v = t.to_json(&f);
    v["conditions"] = json!(conditions);
    Ok(v)
}

pub fn extract_json(k: i32, x: &str, fmt: &str, modes: &str) -> Out {
    let f = parse_fmt(fmt)?;
    let x = parse_fp(&f, x)?;
    let triple = parse_triple(modes)?;
    let anchor = Dyadic::pow2(k as i64);
    let sigma = &anchor + &ulp(&anchor, &f);
    let sigma = f.to_fp(&sigma).map_err(|e| e.to_string())?;
    let plain = f.to_fp(&anchor).map_err(|e| e.to_string())?;
    let holds = check(ConditionId::TheoremExtractScalar, sigma, x, &f, None)
        .map_err(|e| e.to_string())?;
    Ok(json!({
        "condition_holds": holds,
        "anchored": extract_scalar(sigma, x, triple, &f).to_json(&f),
        "plain": extract_scalar(plain, x, triple, &f).to_json(&f),
    }))
}

pub fn format_json(fmt: &str) -> Out {
    let f = parse_fmt(fmt)?;
    Ok(json!({
        "format": f.id(),
        "u": f.unit_roundoff(),
        "max_finite": f.omega(),
        "min_positive": f.omega_min(),
        "count": f.count().to_string(),
        "modes": RoundingMode::ALL,
    }))
}

/// Rounds a dyadic literal under all six modes.
#[wasm_bindgen]
pub fn round_all(value: &str, fmt: &str) -> String {
    respond(round_json(value, fmt))
}

/// FastTwoSum with a triple such as `ro,rd,ru`.
#[wasm_bindgen]
pub fn fts(a: &str, b: &str, fmt: &str, modes: &str) -> String {
    respond(fts_json(a, b, fmt, modes))
}

/// ExtractScalar against `2^k + ulp(2^k)` and against plain `2^k`.
#[wasm_bindgen]
pub fn extract(k: i32, x: &str, fmt: &str, modes: &str) -> String {
    respond(extract_json(k, x, fmt, modes))
}

#[wasm_bindgen]
pub fn format_info(fmt: &str) -> String {
    respond(format_json(fmt))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_neighbors_and_line() {
        let v = round_json("33/2", "4,-10,10").unwrap();
        assert_eq!(v["rd"]["value"], "16");
        assert_eq!(v["ru"]["value"], "18");
        let ro = v["results"].as_array().unwrap().iter().find(|r| r["mode"] == "ro").unwrap();
        assert_eq!(ro["record"]["M"], 9);
        let line: Vec<&str> = v["line"].as_array().unwrap().iter().map(|e| e["value"].as_str().unwrap()).collect();
        assert_eq!(line, ["14", "15", "16", "18", "20", "22"]);
    }

    #[test]
    fn round_overflow_line_stops_at_infinity() {
        let v = round_json("100000", "4,-10,10").unwrap();
        assert_eq!(v["ru"]["value"], "inf");
        assert_eq!(v["line"].as_array().unwrap().last().unwrap()["value"], "inf");
    }

    #[test]
    fn fts_known_pair() {
        let v = fts_json("18", "-1/16", "4,-10,10", "rz,rz,rz").unwrap();
        assert_eq!(v["eft"], false);
        assert_eq!(v["z"]["value"], "-2");
        let v = fts_json("18", "-1/16", "4,-10,10", "ro,ro,ro").unwrap();
        assert_eq!(v["eft"], true);
        assert!(v["conditions"].as_array().unwrap().iter().any(|c| c["condition"] == "theorem_rto1" && c["holds"] == true));
    }

    #[test]
    fn extract_anchor_and_control() {
        let v = extract_json(0, "1/256", "4,-10,10", "ro,ro,ro").unwrap();
        assert_eq!(v["condition_holds"], true);
        assert_eq!(v["anchored"]["exact_split"], true);
        assert_eq!(v["plain"]["exact_split"], false);
    }

    #[test]
    fn errors_are_json() {
        let s = fts("17", "1", "4,-10,10", "ro,ro,ro");
        let v: Value = serde_json::from_str(&s).unwrap();
        assert!(v["error"].as_str().unwrap().contains("17"));
        assert!(round_json("1", "0,0,0").is_err());
        assert!(extract_json(40, "1", "4,-10,10", "ro,ro,ro").is_err());
        assert_eq!(format_json("3,-6,6").unwrap()["count"], "111");
    }
}
