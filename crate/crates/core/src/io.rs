//! JSON market files.
//!
//! ```json
//! {"horizon": 1, "assets": 1,
//!  "models": [{"name": "coin", "initial": [0.0]}],
//!  "root": {"children": [
//!     {"prob": 0.5, "increments": {"coin": [1.0]}},
//!     {"prob": 0.5, "increments": {"coin": [-1.0]}}]}}
//! ```

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::market::{ModelFamily, PriceModel};
use crate::space::{FilteredTree, NodeId, NodeSpec};

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

fn vector(v: &Value, len: usize, path: &str) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| schema(path, "expected an array of numbers"))?;
    if arr.len() != len {
        return Err(schema(path, format!("expected {len} entries, found {}", arr.len())));
    }
    arr.iter()
        .map(|x| x.as_f64().ok_or_else(|| schema(path, "expected a number")))
        .collect()
}

fn count(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    obj.get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| schema(key, "expected a non-negative integer"))
}

struct Parsed {
    spec: NodeSpec,
    /// Per model, increments in depth-first order of non-root nodes.
    increments: Vec<Vec<Vec<f64>>>,
}

fn parse_node(v: &Value, path: &str, names: &[String], assets: usize, root: bool, out: &mut Parsed) -> Result<NodeSpec> {
    let obj = v.as_object().ok_or_else(|| schema(path, "expected an object"))?;
    for key in obj.keys() {
        if !["prob", "increments", "children"].contains(&key.as_str()) {
            return Err(schema(path, format!("unknown key `{key}`")));
        }
    }
    let prob = if root {
        1.0
    } else {
        let p = obj.get("prob").ok_or_else(|| schema(path, "missing `prob`"))?;
        let p = p.as_f64().ok_or_else(|| schema(path, "`prob` must be a number"))?;
        let incs = obj
            .get("increments")
            .and_then(Value::as_object)
            .ok_or_else(|| schema(path, "missing `increments` object"))?;
        for key in incs.keys() {
            if !names.contains(key) {
                return Err(schema(path, format!("increment for unknown model `{key}`")));
            }
        }
        for (m, name) in names.iter().enumerate() {
            let inc = incs
                .get(name)
                .ok_or_else(|| schema(path, format!("missing increment for model `{name}`")))?;
            out.increments[m].push(vector(inc, assets, &format!("{path}/increments/{name}"))?);
        }
        p
    };
    let children = match obj.get("children") {
        None => Vec::new(),
        Some(c) => {
            let arr = c.as_array().ok_or_else(|| schema(path, "`children` must be an array"))?;
            arr.iter()
                .enumerate()
                .map(|(k, c)| parse_node(c, &format!("{path}/{k}"), names, assets, false, out))
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(NodeSpec { prob, children })
}

/// Parses a market document.
pub fn parse_market(text: &str) -> Result<ModelFamily> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| schema(&format!("line {}, column {}", e.line(), e.column()), e.to_string()))?;
    let top = doc.as_object().ok_or_else(|| schema("", "expected a JSON object"))?;
    let horizon = count(top, "horizon")?;
    let assets = count(top, "assets")?;
    if assets == 0 {
        return Err(schema("assets", "at least one asset is required"));
    }
    let models = top
        .get("models")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("models", "expected an array"))?;
    let mut names = Vec::new();
    let mut initials = Vec::new();
    for (i, m) in models.iter().enumerate() {
        let path = format!("models/{i}");
        let name = m
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| schema(&path, "missing `name`"))?;
        let init = m.get("initial").ok_or_else(|| schema(&path, "missing `initial`"))?;
        names.push(name.to_string());
        initials.push(vector(init, assets, &format!("{path}/initial"))?);
    }
    let root = top.get("root").ok_or_else(|| schema("root", "missing"))?;
    let mut parsed = Parsed {
        spec: NodeSpec::leaf(1.0),
        increments: vec![Vec::new(); names.len()],
    };
    parsed.spec = parse_node(root, "root", &names, assets, true, &mut parsed)?;
    let tree = FilteredTree::build(&parsed.spec)?;
    if tree.horizon() != horizon {
        return Err(schema("horizon", format!("declared {horizon}, tree has depth {}", tree.horizon())));
    }
    let models = names
        .into_iter()
        .zip(initials)
        .zip(parsed.increments)
        .map(|((name, initial), incs)| {
            let mut increments = vec![vec![0.0; assets]];
            increments.extend(incs);
            PriceModel {
                name,
                initial,
                increments,
            }
        })
        .collect();
    ModelFamily::new(tree, models)
}

pub fn load_market(path: impl AsRef<Path>) -> Result<ModelFamily> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_market(&text)
}

/// Market document for `family`. Numbers are written in shortest
/// round-trip form, so reloading is bit-exact.
pub fn market_to_json(family: &ModelFamily) -> Result<Value> {
    let tree = &family.tree;
    fn num(x: f64) -> Result<Value> {
        serde_json::Number::from_f64(x)
            .map(Value::Number)
            .ok_or_else(|| Error::BadParameters(format!("cannot serialise non-finite number {x}")))
    }
    fn node(family: &ModelFamily, n: NodeId) -> Result<Value> {
        let tree = &family.tree;
        let mut obj = Map::new();
        if n != tree.root() {
            obj.insert("prob".into(), num(tree.cond_prob(n))?);
            let mut incs = Map::new();
            for m in &family.models {
                let v = m.increment(n).iter().map(|&x| num(x)).collect::<Result<Vec<_>>>()?;
                incs.insert(m.name.clone(), Value::Array(v));
            }
            obj.insert("increments".into(), Value::Object(incs));
        }
        if !tree.is_leaf(n) {
            let children = tree.children(n).iter().map(|&c| node(family, c)).collect::<Result<Vec<_>>>()?;
            obj.insert("children".into(), Value::Array(children));
        }
        Ok(Value::Object(obj))
    }
    let models = family
        .models
        .iter()
        .map(|m| {
            let init = m.initial.iter().map(|&x| num(x)).collect::<Result<Vec<_>>>()?;
            Ok(json!({"name": m.name, "initial": init}))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "horizon": tree.horizon(),
        "assets": family.dim(),
        "models": models,
        "root": node(family, tree.root())?,
    }))
}

pub fn save_market(family: &ModelFamily, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&market_to_json(family)?)
        .map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path.as_ref(), text + "\n")
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const COIN: &str = r#"{"horizon": 1, "assets": 1,
        "models": [{"name": "coin", "initial": [0.0]}],
        "root": {"children": [
            {"prob": 0.5, "increments": {"coin": [1.0]}},
            {"prob": 0.5, "increments": {"coin": [-1.0]}}]}}"#;

    #[test]
    fn parses_the_coin() {
        let fam = parse_market(COIN).unwrap();
        assert_eq!(fam.tree.leaf_count(), 2);
        assert_eq!(fam.models[0].increment(2), &[-1.0]);
    }

    #[test]
    fn round_trip_is_exact() {
        let fam = parse_market(COIN).unwrap();
        let text = serde_json::to_string(&market_to_json(&fam).unwrap()).unwrap();
        assert_eq!(parse_market(&text).unwrap(), fam);
    }

    #[test]
    fn awkward_probabilities_survive_a_round_trip() {
        let text = COIN
            .replacen("\"prob\": 0.5", "\"prob\": 0.1", 1)
            .replacen("\"prob\": 0.5", "\"prob\": 0.9000000000001", 1);
        let fam = parse_market(&text).unwrap();
        let again = parse_market(&serde_json::to_string(&market_to_json(&fam).unwrap()).unwrap()).unwrap();
        assert_eq!(again, fam);
    }

    #[test]
    fn missing_increment_names_the_node() {
        let text = COIN.replace(r#"{"coin": [-1.0]}"#, "{}");
        match parse_market(&text) {
            Err(Error::Schema { path, message }) => {
                assert_eq!(path, "root/1");
                assert!(message.contains("coin"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn probability_errors_carry_the_path() {
        let text = COIN.replacen("0.5", "0.7", 1).replacen("0.5", "0.2", 1);
        assert!(matches!(
            parse_market(&text),
            Err(Error::ProbabilitySumViolation { ref path, .. }) if path == "root"
        ));
    }

    #[test]
    fn syntax_errors_report_a_line() {
        match parse_market("{\n\"horizon\": 1,,\n}") {
            Err(Error::Schema { path, .. }) => assert!(path.starts_with("line 2")),
            other => panic!("{other:?}"),
        }
    }
}
