//! Decoding the JSON value returned by a guest entry function.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde_json::Value;

use super::*;

fn malformed(msg: impl Into<String>) -> CopError {
    CopError::MalformedSolution(msg.into())
}

fn list(v: &Value, what: &str) -> Result<Vec<Value>, CopError> {
    v.as_array().cloned().ok_or_else(|| malformed(format!("{what} must be a list")))
}

/// Non-negative integer, allowing integer-valued floats such as `3.0`.
fn index(v: &Value) -> Result<usize, CopError> {
    let x = int(v)?;
    usize::try_from(x).map_err(|_| malformed(format!("negative index {x}")))
}

fn int(v: &Value) -> Result<i64, CopError> {
    if let Some(i) = v.as_i64() {
        return Ok(i);
    }
    if let Some(b) = v.as_bool() {
        return Ok(b as i64);
    }
    match v.as_f64() {
        Some(f) if f.is_finite() && libm::trunc(f) == f && libm::fabs(f) < 9.0e15 => Ok(f as i64),
        _ => Err(malformed(format!("expected an integer, got {v}"))),
    }
}

fn number(v: &Value) -> Result<f64, CopError> {
    match v.as_f64() {
        Some(f) if f.is_finite() => Ok(f),
        _ => Err(malformed(format!("expected a number, got {v}"))),
    }
}

fn pair(v: &Value) -> Result<(Value, Value), CopError> {
    match v.as_array() {
        Some(a) if a.len() == 2 => Ok((a[0].clone(), a[1].clone())),
        _ => Err(malformed(format!("expected a pair, got {v}"))),
    }
}

pub fn decode_solution(instance: &CopInstance, value: &Value) -> Result<CopSolution, CopError> {
    match &instance.data {
        InstanceData::Cflp(i) => cflp(i, value),
        InstanceData::Cvrp(_) => routes(value).map(CopSolution::Cvrp),
        InstanceData::Fjsp(_) => fjsp(value),
        InstanceData::Mis(i) => mis(i, value),
        InstanceData::Cevrptw(_) => routes(value).map(CopSolution::Cevrptw),
        InstanceData::Mrcpsp(_) => mrcpsp(value),
    }
}

/// Accepts a facility per customer, `(facility, customer)` pairs, or an
/// `M x N` 0/1 allocation matrix.
fn cflp(inst: &CflpInstance, value: &Value) -> Result<CopSolution, CopError> {
    let m = inst.facility_capacities.len();
    let n = inst.customer_demands.len();
    let items = list(value, "assignment")?;
    if items.iter().all(|x| !x.is_array()) {
        let pairs = items.iter().enumerate().map(|(c, f)| Ok((index(f)?, c))).collect::<Result<_, CopError>>()?;
        return Ok(CopSolution::Cflp(pairs));
    }
    let rows: Vec<Vec<Value>> = items.iter().map(|r| list(r, "assignment row")).collect::<Result<_, _>>()?;
    let is_matrix = rows.len() == m
        && rows.iter().all(|r| r.len() == n)
        && rows.iter().flatten().all(|x| matches!(int(x), Ok(0 | 1)))
        && (n != 2 || (0..n).all(|c| rows.iter().filter(|r| int(&r[c]) == Ok(1)).count() == 1));
    if is_matrix {
        let mut pairs = Vec::new();
        for (f, r) in rows.iter().enumerate() {
            for (c, x) in r.iter().enumerate() {
                if int(x)? == 1 {
                    pairs.push((f, c));
                }
            }
        }
        return Ok(CopSolution::Cflp(pairs));
    }
    let pairs = items
        .iter()
        .map(|p| {
            let (f, c) = pair(p)?;
            Ok((index(&f)?, index(&c)?))
        })
        .collect::<Result<_, CopError>>()?;
    Ok(CopSolution::Cflp(pairs))
}

/// Flat lists use the depot `0` as a separator; nested lists may or may not
/// carry depot endpoints. Empty routes are dropped.
fn routes(value: &Value) -> Result<Vec<Vec<usize>>, CopError> {
    let items = list(value, "routes")?;
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let push = |node: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>| {
        if node == 0 {
            if !cur.is_empty() {
                out.push(core::mem::take(cur));
            }
        } else {
            cur.push(node);
        }
    };
    for item in &items {
        match item.as_array() {
            Some(route) => {
                push(0, &mut cur, &mut out);
                for node in route {
                    push(index(node)?, &mut cur, &mut out);
                }
                push(0, &mut cur, &mut out);
            }
            None => push(index(item)?, &mut cur, &mut out),
        }
    }
    push(0, &mut cur, &mut out);
    Ok(out)
}

fn fjsp(value: &Value) -> Result<CopSolution, CopError> {
    let jobs = list(value, "schedule")?;
    let mut out = Vec::with_capacity(jobs.len());
    for job in &jobs {
        let ops = list(job, "job schedule")?;
        let mut row = Vec::with_capacity(ops.len());
        for op in &ops {
            let (m, s) = pair(op)?;
            row.push((index(&m)?, number(&s)?));
        }
        out.push(row);
    }
    Ok(CopSolution::Fjsp(out))
}

fn mis(inst: &MisInstance, value: &Value) -> Result<CopSolution, CopError> {
    let items = list(value, "vertex set")?;
    let mut seen = alloc::vec![false; inst.num_vertices];
    let mut out = Vec::with_capacity(items.len());
    for v in &items {
        let x = index(v)?;
        if x >= inst.num_vertices {
            return Err(malformed(format!("vertex {x} out of range")));
        }
        if core::mem::replace(&mut seen[x], true) {
            return Err(malformed(format!("vertex {x} repeated")));
        }
        out.push(x);
    }
    Ok(CopSolution::Mis(out))
}

fn mrcpsp(value: &Value) -> Result<CopSolution, CopError> {
    let items = list(value, "schedule")?;
    let out = items
        .iter()
        .map(|p| {
            let (m, f) = pair(p)?;
            Ok((index(&m)?, int(&f)?))
        })
        .collect::<Result<_, CopError>>()?;
    Ok(CopSolution::Mrcpsp(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use serde_json::json;

    fn cflp_inst() -> CopInstance {
        CopInstance::new(
            Tier::Tiny,
            0,
            InstanceData::Cflp(CflpInstance {
                facility_capacities: vec![10, 10],
                customer_demands: vec![1, 1, 1],
                assignment_costs: vec![vec![1, 1, 1], vec![1, 1, 1]],
                fixed_costs: vec![1.0, 1.0],
            }),
        )
    }

    #[test]
    fn cflp_encodings_agree() {
        let i = cflp_inst();
        let want = CopSolution::Cflp(vec![(0, 0), (1, 1), (0, 2)]);
        assert_eq!(decode_solution(&i, &json!([0, 1, 0])).unwrap(), want);
        assert_eq!(decode_solution(&i, &json!([[0, 0], [1, 1], [0, 2]])).unwrap(), want);
        let mut sorted = match decode_solution(&i, &json!([[1, 0, 1], [0, 1, 0]])).unwrap() {
            CopSolution::Cflp(p) => p,
            _ => unreachable!(),
        };
        sorted.sort_by_key(|p| p.1);
        assert_eq!(CopSolution::Cflp(sorted), want);
        assert_eq!(decode_solution(&i, &json!([0.0, 1.0, 0.0])).unwrap(), want);
        assert!(decode_solution(&i, &json!([0, -1, 0])).is_err());
        assert!(decode_solution(&i, &json!("x")).is_err());
    }

    #[test]
    fn route_encodings_agree() {
        let i = generate_tiny(Problem::Cvrp, 0);
        let want = CopSolution::Cvrp(vec![vec![1, 2], vec![3]]);
        for v in [json!([0, 1, 2, 0, 3, 0]), json!([1, 2, 0, 3]), json!([[1, 2], [3]]), json!([[0, 1, 2, 0], [0, 3, 0]]), json!([0, 1, 2, 0, 0, 3, 0])] {
            assert_eq!(decode_solution(&i, &v).unwrap(), want, "{v}");
        }
        assert!(decode_solution(&i, &json!([1, 2.5])).is_err());
    }

    #[test]
    fn other_shapes() {
        let mis = CopInstance::new(Tier::Tiny, 0, InstanceData::Mis(MisInstance { num_vertices: 3, edges: vec![] }));
        assert_eq!(decode_solution(&mis, &json!([2, 0])).unwrap(), CopSolution::Mis(vec![2, 0]));
        assert!(decode_solution(&mis, &json!([0, 0])).is_err());
        assert!(decode_solution(&mis, &json!([3])).is_err());

        let fj = generate_tiny(Problem::Fjsp, 0);
        assert_eq!(decode_solution(&fj, &json!([[[0, 1.5]], []])).unwrap(), CopSolution::Fjsp(vec![vec![(0, 1.5)], vec![]]));
        assert!(decode_solution(&fj, &json!([[[0]]])).is_err());

        let mr = generate_tiny(Problem::Mrcpsp, 0);
        assert_eq!(decode_solution(&mr, &json!([[0, 0], [2, 7.0]])).unwrap(), CopSolution::Mrcpsp(vec![(0, 0), (2, 7)]));
        assert!(decode_solution(&mr, &json!([[0, 0.5]])).is_err());
        assert!(decode_solution(&mr, &json!(null)).is_err());
    }
}
