// SPDX-License-Identifier: Apache-2.0
//! FSM lowering to a single clocked process.

use crate::ir::{Assign, AssignKind, CaseArm, Choice, Expr, Fsm, Stmt, TypeDesc, WireDecl};

/// Result of lowering one FSM.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoweredFsm {
    /// Enumerated state register; its first state is the reset value.
    pub register: WireDecl,
    /// `Sequential "<label>_update"`: defaults, then a case over the state.
    pub update: Stmt,
    /// `Combinatorial "<label>_comb"` holding the `comb_assign`s, if any.
    pub comb: Option<Stmt>,
}

pub fn state_register_name(label: &str) -> String {
    format!("{label}_state")
}

pub fn state_type(fsm: &Fsm) -> TypeDesc {
    TypeDesc::Enum {
        name: format!("{}_state_t", fsm.label),
        states: fsm.states.iter().map(|s| s.name.clone()).collect(),
    }
}

pub fn lower_fsm(fsm: &Fsm) -> LoweredFsm {
    let reg = state_register_name(&fsm.label);
    let selector = Expr::sig(reg.clone());

    let mut body: Vec<Stmt> = fsm
        .defaults
        .iter()
        .map(|a| {
            Stmt::Assign(Assign {
                kind: AssignKind::Embedded,
                ..a.clone()
            })
        })
        .collect();
    body.push(Stmt::Case {
        selector: selector.clone(),
        arms: fsm
            .states
            .iter()
            .map(|s| CaseArm {
                choice: Choice::State(s.name.clone()),
                body: sequential_part(&s.body, &reg),
            })
            .collect(),
        default: Vec::new(),
    });
    let update = Stmt::Sequential {
        label: format!("{}_update", fsm.label),
        body,
    };

    let comb_arms: Vec<CaseArm> = fsm
        .states
        .iter()
        .map(|s| CaseArm {
            choice: Choice::State(s.name.clone()),
            body: comb_part(&s.body),
        })
        .collect();
    let comb = if comb_arms.iter().all(|a| a.body.is_empty()) {
        None
    } else {
        let mut targets: Vec<Expr> = Vec::new();
        for arm in &comb_arms {
            for s in &arm.body {
                s.walk(&mut |s| {
                    if let Stmt::Assign(a) = s {
                        if let Some(root) = a.lhs.root() {
                            if !targets.contains(root) {
                                targets.push(root.clone());
                            }
                        }
                    }
                });
            }
        }
        let mut body: Vec<Stmt> = targets
            .into_iter()
            .map(|t| {
                Stmt::Assign(Assign {
                    lhs: t,
                    rhs: Expr::lit(0),
                    kind: AssignKind::Embedded,
                })
            })
            .collect();
        body.push(Stmt::Case {
            selector,
            arms: comb_arms,
            default: Vec::new(),
        });
        Some(Stmt::Combinatorial {
            label: Some(format!("{}_comb", fsm.label)),
            body,
        })
    };

    LoweredFsm {
        register: WireDecl {
            name: reg,
            ty: state_type(fsm),
        },
        update,
        comb,
    }
}

/// Drops `comb_assign`s and turns `next_state` into a register assignment.
fn sequential_part(body: &[Stmt], reg: &str) -> Vec<Stmt> {
    filter_body(body, &mut |s| match s {
        Stmt::Assign(a) => Some(Stmt::Assign(a.clone())),
        Stmt::NextState(target) => Some(Stmt::Assign(Assign {
            lhs: Expr::sig(reg),
            rhs: Expr::State(target.clone()),
            kind: AssignKind::Embedded,
        })),
        _ => None,
    })
}

/// Keeps only `comb_assign`s (as plain assignments) and their guards.
fn comb_part(body: &[Stmt]) -> Vec<Stmt> {
    filter_body(body, &mut |s| match s {
        Stmt::CombAssign(a) => Some(Stmt::Assign(a.clone())),
        _ => None,
    })
}

fn filter_body(body: &[Stmt], leaf: &mut impl FnMut(&Stmt) -> Option<Stmt>) -> Vec<Stmt> {
    let mut out = Vec::new();
    for s in body {
        match s {
            Stmt::If {
                cond,
                then_body,
                else_body,
            } => {
                let t = filter_body(then_body, leaf);
                let e = filter_body(else_body, leaf);
                let emptied = t.is_empty() && e.is_empty();
                if !emptied || (then_body.is_empty() && else_body.is_empty()) {
                    out.push(Stmt::If {
                        cond: cond.clone(),
                        then_body: t,
                        else_body: e,
                    });
                }
            }
            Stmt::Case {
                selector,
                arms,
                default,
            } => {
                let new_arms: Vec<CaseArm> = arms
                    .iter()
                    .map(|a| CaseArm {
                        choice: a.choice.clone(),
                        body: filter_body(&a.body, leaf),
                    })
                    .collect();
                let new_default = filter_body(default, leaf);
                let emptied = new_arms.iter().all(|a| a.body.is_empty()) && new_default.is_empty();
                let was_empty = arms.iter().all(|a| a.body.is_empty()) && default.is_empty();
                if !emptied || was_empty {
                    out.push(Stmt::Case {
                        selector: selector.clone(),
                        arms: new_arms,
                        default: new_default,
                    });
                }
            }
            other => out.extend(leaf(other)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::StateDecl;

    fn assign(l: &str, r: u64) -> Stmt {
        Stmt::Assign(Assign {
            lhs: Expr::sig(l),
            rhs: Expr::lit(r),
            kind: AssignKind::Embedded,
        })
    }

    #[test]
    fn single_state_without_transition() {
        let fsm = Fsm {
            label: "one".into(),
            defaults: vec![],
            states: vec![StateDecl {
                name: "idle".into(),
                body: vec![assign("y", 1)],
            }],
        };
        let l = lower_fsm(&fsm);
        assert_eq!(l.register.name, "one_state");
        assert_eq!(l.register.ty.width(), Some(1));
        let Stmt::Sequential { label, body } = &l.update else { panic!() };
        assert_eq!(label, "one_update");
        let Stmt::Case { arms, .. } = &body[0] else { panic!() };
        assert_eq!(arms.len(), 1);
        assert!(l.comb.is_none());
    }

    #[test]
    fn comb_assign_is_split_out() {
        let fsm = Fsm {
            label: "m".into(),
            defaults: vec![],
            states: vec![
                StateDecl {
                    name: "a".into(),
                    body: vec![
                        Stmt::CombAssign(Assign {
                            lhs: Expr::sig("busy"),
                            rhs: Expr::lit(1),
                            kind: AssignKind::Embedded,
                        }),
                        Stmt::NextState("b".into()),
                    ],
                },
                StateDecl {
                    name: "b".into(),
                    body: vec![Stmt::NextState("a".into())],
                },
            ],
        };
        let l = lower_fsm(&fsm);
        let Some(Stmt::Combinatorial { label, body }) = &l.comb else { panic!() };
        assert_eq!(label.as_deref(), Some("m_comb"));
        assert_eq!(body[0], assign("busy", 0));
        let Stmt::Sequential { body, .. } = &l.update else { panic!() };
        let Stmt::Case { arms, .. } = &body[0] else { panic!() };
        assert_eq!(
            arms[0].body,
            vec![Stmt::Assign(Assign {
                lhs: Expr::sig("m_state"),
                rhs: Expr::State("b".into()),
                kind: AssignKind::Embedded
            })]
        );
    }
}
