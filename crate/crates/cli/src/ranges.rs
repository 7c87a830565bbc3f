/// Values parsed from `N`, `A..B` (inclusive) or comma-separated items.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct List(pub Vec<usize>);

pub fn parse_list(s: &str) -> Result<List, String> {
    let mut out = Vec::new();
    for item in s.split(',') {
        let item = item.trim();
        if let Some((a, b)) = item.split_once("..") {
            let a = parse_one(a)?;
            let b = parse_one(b)?;
            if a > b {
                return Err(format!("empty range {item:?}"));
            }
            out.extend(a..=b);
        } else {
            out.push(parse_one(item)?);
        }
    }
    Ok(List(out))
}

fn parse_one(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) => Err("values must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("not a positive integer: {s:?}")),
    }
}
