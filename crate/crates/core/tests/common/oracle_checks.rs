//! Solver and abduction checks against the naive reference evaluators,
//! shared by the property tests and the acceptance run.

use std::collections::BTreeSet;

use abditom_core::{
    abduce, entails, parse_literal, parse_program, parse_query, solve, AbducibleSet, AbductionLimits, Literal,
    SolverLimits, Term,
};
use abditom_oracle::{brute_force_abduce, fixpoint, program_text, random_abductive_theory, random_ground_program};

pub fn check_ground_program(seed: u64) -> Result<(), String> {
    let case = random_ground_program(seed, 15);
    let kb = parse_program(&program_text(&case.rules)).map_err(|e| e.to_string())?;
    let model = fixpoint(&case.rules, &[]);
    for atom in &case.universe {
        let lit = parse_literal(&atom.to_string()).unwrap();
        let got = entails(&kb, &lit).map_err(|e| e.to_string())?;
        if got != model.contains(atom) {
            return Err(format!("seed {seed}: {atom} solver={got} oracle={}", !got));
        }
    }
    // open queries enumerate exactly the model's atoms for each predicate; proofs
    // multiply through bodies, so a capped stream is only checked for soundness
    const PROOF_CAP: usize = 20_000;
    let limits = SolverLimits { max_solutions: Some(PROOF_CAP), ..SolverLimits::default() };
    let mut preds: Vec<(String, usize)> = case.universe.iter().map(|a| (a.pred.clone(), a.args.len())).collect();
    preds.dedup();
    for (pred, arity) in preds {
        if arity == 0 {
            continue;
        }
        let vars: Vec<String> = (0..arity).map(|i| format!("X{i}")).collect();
        let q = parse_query(&format!("{pred}({})", vars.join(","))).unwrap();
        let mut got = BTreeSet::new();
        let mut proofs = 0;
        for s in solve(&kb, &q.goal, limits) {
            proofs += 1;
            let s = s.map_err(|e| e.to_string())?;
            let lit = abditom_core::Literal {
                negated: false,
                pred: abditom_core::Sym::new(&pred),
                args: (0..arity as u32).map(|i| s.apply(&Term::Var(abditom_core::Var(i)))).collect(),
            };
            got.insert(lit.to_string());
        }
        let want: BTreeSet<String> =
            model.iter().filter(|a| a.pred == pred).map(|a| a.to_string()).collect();
        if proofs == PROOF_CAP && got.is_subset(&want) {
            continue;
        }
        if got != want {
            return Err(format!("seed {seed}: answers for {pred} differ: {got:?} vs {want:?}"));
        }
    }
    Ok(())
}

pub fn check_abduction(seed: u64) -> Result<(), String> {
    let case = random_abductive_theory(seed, 15);
    let text = program_text(&case.rules);
    let kb = parse_program(&text).map_err(|e| format!("{e}\n{text}"))?;
    let set = AbducibleSet::new(case.abducibles.iter().map(|a| parse_literal(&a.to_string()).unwrap()));
    let q = parse_query(&case.query_text()).unwrap();
    let got: Vec<Vec<String>> = abduce(&kb, &set, &q.goal, &AbductionLimits::default())
        .map_err(|e| e.to_string())?
        .iter()
        .map(|e| e.literals().iter().map(Literal::to_string).collect())
        .collect();
    let want: Vec<Vec<String>> =
        brute_force_abduce(&case).iter().map(|d| d.iter().map(|a| a.to_string()).collect()).collect();
    let (g, w): (BTreeSet<_>, BTreeSet<_>) = (got.iter().collect(), want.iter().collect());
    if g != w {
        return Err(format!(
            "seed {seed}: abduce {got:?} brute force {want:?}\nquery {}\n{text}",
            case.query_text()
        ));
    }
    Ok(())
}
