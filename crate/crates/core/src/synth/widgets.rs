use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::ast::{AstNode, Template, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidgetType {
    Button,
    Toggle,
    Dropdown,
    Textbox,
    Slider,
    RangeSlider,
    CheckboxList,
    MultiSelect,
}

/// What the general domains look at: arity, size, numeric columns and
/// whether pairs are strictly increasing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DomainShape {
    pub arity: usize,
    pub collection: bool,
    pub n: usize,
    pub numeric: [bool; 2],
    pub ordered: bool,
}

impl DomainShape {
    pub fn of(arity: usize, collection: bool, domain: &BTreeSet<Vec<Value>>) -> Self {
        let mut s = DomainShape::empty(arity, collection);
        for t in domain {
            s.add(t);
        }
        s
    }

    pub(crate) fn empty(arity: usize, collection: bool) -> Self {
        DomainShape { arity, collection, n: 0, numeric: [true; 2], ordered: true }
    }

    pub(crate) fn add(&mut self, t: &[Value]) {
        self.n += 1;
        for (i, num) in self.numeric.iter_mut().enumerate() {
            *num &= t.get(i).is_none_or(Value::is_numeric);
        }
        self.ordered &= match (t.first().and_then(Value::as_f64), t.get(1).and_then(Value::as_f64)) {
            (Some(a), Some(b)) => a < b,
            _ => false,
        };
    }
}

/// Cost families every widget type implements, in alpha order.
pub const COST_FAMILIES: [&str; 2] = ["visual", "effort"];

impl WidgetType {
    pub const ALL: [WidgetType; 8] = [
        WidgetType::Button,
        WidgetType::Toggle,
        WidgetType::Dropdown,
        WidgetType::Textbox,
        WidgetType::Slider,
        WidgetType::RangeSlider,
        WidgetType::CheckboxList,
        WidgetType::MultiSelect,
    ];

    pub fn id(self) -> &'static str {
        match self {
            WidgetType::Button => "button",
            WidgetType::Toggle => "toggle",
            WidgetType::Dropdown => "dropdown",
            WidgetType::Textbox => "textbox",
            WidgetType::Slider => "slider",
            WidgetType::RangeSlider => "range_slider",
            WidgetType::CheckboxList => "checkbox_list",
            WidgetType::MultiSelect => "multi_select",
        }
    }

    pub fn collection_capable(self) -> bool {
        matches!(self, WidgetType::CheckboxList | WidgetType::MultiSelect)
    }

    /// Free-form widgets accept values outside their domain.
    pub fn free_form(self) -> bool {
        self == WidgetType::Textbox
    }

    /// Whether a domain lies in the type's general domain. Collection
    /// types take the option set of a list edge instead of tuples.
    pub fn accepts(self, shape: &DomainShape) -> bool {
        if shape.collection != self.collection_capable() {
            return false;
        }
        match self {
            WidgetType::Button => shape.arity == 0,
            WidgetType::Toggle => shape.arity == 1 && shape.n <= 2,
            WidgetType::Textbox => shape.arity == 1,
            WidgetType::Slider => shape.arity == 1 && shape.numeric[0],
            WidgetType::Dropdown => shape.arity >= 1,
            WidgetType::RangeSlider => shape.arity == 2 && shape.numeric[0] && shape.numeric[1] && shape.ordered,
            WidgetType::CheckboxList | WidgetType::MultiSelect => true,
        }
    }

    /// Visual complexity for a domain of `n` elements.
    pub fn visual(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            WidgetType::Button => (n - 1.0).clamp(0.0, 1.0),
            WidgetType::Toggle => {
                if n == 2.0 {
                    0.0
                } else {
                    1.0
                }
            }
            WidgetType::Dropdown | WidgetType::MultiSelect => (n / 20.0).min(1.0),
            WidgetType::CheckboxList => (n / 12.0).min(1.0),
            WidgetType::Textbox => 0.1,
            WidgetType::Slider | WidgetType::RangeSlider => 0.15,
        }
    }

    /// User effort per manipulation; independent of the domain.
    pub fn effort(self) -> f64 {
        match self {
            WidgetType::Button | WidgetType::Toggle => 0.1,
            WidgetType::Dropdown => 0.4,
            WidgetType::Textbox => 1.0,
            WidgetType::Slider | WidgetType::RangeSlider => 0.2,
            WidgetType::CheckboxList | WidgetType::MultiSelect => 0.3,
        }
    }

    pub fn cost_terms(self, n: usize) -> [f64; 2] {
        [self.visual(n), self.effort()]
    }
}

/// Σ α_i · C_i for one widget type over a domain of `n` elements.
pub fn widget_cost(t: WidgetType, n: usize, alphas: &[f64]) -> Result<f64, SynthError> {
    if alphas.len() != COST_FAMILIES.len() {
        return Err(SynthError::WeightMismatch { expected: COST_FAMILIES.len(), found: alphas.len() });
    }
    Ok(t.cost_terms(n).iter().zip(alphas).map(|(c, a)| c * a).sum())
}

/// Widgets that share path and template but differ in type; the set costs
/// as much as its cheapest member.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    pub types: Vec<WidgetType>,
    pub domain_size: usize,
}

impl CandidateSet {
    pub fn cost(&self, alphas: &[f64]) -> Result<f64, SynthError> {
        Ok(self.cheapest(alphas)?.1)
    }

    /// Cheapest member; ties go to the earlier type.
    pub fn cheapest(&self, alphas: &[f64]) -> Result<(WidgetType, f64), SynthError> {
        let mut best: Option<(WidgetType, f64)> = None;
        for &t in &self.types {
            let c = widget_cost(t, self.domain_size, alphas)?;
            if best.is_none_or(|(_, b)| c < b) {
                best = Some((t, c));
            }
        }
        best.ok_or(SynthError::NoCandidate)
    }
}

/// Every type in `types` whose general domain holds the whole value table.
pub fn candidate_widgets(arity: usize, collection: bool, domain: &BTreeSet<Vec<Value>>, types: &[WidgetType]) -> Result<CandidateSet, SynthError> {
    if types.is_empty() {
        return Err(SynthError::NoCandidate);
    }
    let shape = DomainShape::of(arity, collection, domain);
    let ok: Vec<WidgetType> = types.iter().copied().filter(|t| t.accepts(&shape)).collect();
    if ok.is_empty() {
        return Err(SynthError::NoCandidate);
    }
    Ok(CandidateSet { types: ok, domain_size: domain.len() })
}

/// Parameterizes every primitive of each subtree. All subtrees must share
/// one template; returns it with the indices K that vary and the table of
/// K-projections (empty when nothing varies).
pub fn extract_template_function(subtrees: &[AstNode]) -> Result<(Template, Vec<usize>, BTreeSet<Vec<Value>>), SynthError> {
    let (first, rest) = subtrees.split_first().ok_or(SynthError::HeterogeneousGroup)?;
    let (t, v0) = Template::parameterize(first);
    let mut rows = vec![v0];
    for s in rest {
        let (ti, vi) = Template::parameterize(s);
        if ti != t {
            return Err(SynthError::HeterogeneousGroup);
        }
        rows.push(vi);
    }
    let k = varying(&rows);
    let table = if k.is_empty() { BTreeSet::new() } else { rows.iter().map(|r| project(r, &k)).collect() };
    Ok((t, k, table))
}

pub(crate) fn varying(rows: &[Vec<Value>]) -> Vec<usize> {
    let Some(first) = rows.first() else { return vec![] };
    (0..first.len()).filter(|&i| rows.iter().any(|r| r[i] != first[i])).collect()
}

pub(crate) fn project(row: &[Value], k: &[usize]) -> Vec<Value> {
    k.iter().map(|&i| row[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(vals: &[&[Value]]) -> BTreeSet<Vec<Value>> {
        vals.iter().map(|v| v.to_vec()).collect()
    }

    #[test]
    fn button_and_checkbox_formulas() {
        let unit = [1.0, 1.0];
        for (n, button, checkbox) in [(1, 0.0, 1.0 / 12.0), (2, 1.0, 2.0 / 12.0), (3, 1.0, 0.25), (6, 1.0, 0.5), (12, 1.0, 1.0), (20, 1.0, 1.0)] {
            assert_eq!(WidgetType::Button.visual(n), button);
            assert_eq!(WidgetType::CheckboxList.visual(n), checkbox);
        }
        assert!((widget_cost(WidgetType::CheckboxList, 6, &unit).unwrap() - 0.8).abs() < 1e-12);
        assert!(matches!(widget_cost(WidgetType::Button, 1, &[1.0]), Err(SynthError::WeightMismatch { expected: 2, found: 1 })));
        for t in WidgetType::ALL {
            for n in 0..40 {
                assert!(t.cost_terms(n).iter().all(|c| (0.0..=1.0).contains(c)));
            }
        }
    }

    #[test]
    fn candidates_follow_domains() {
        let cities = dom(&[&["NY".into()], &["LA".into()]]);
        let c = candidate_widgets(1, false, &cities, &WidgetType::ALL).unwrap();
        assert_eq!(c.types, vec![WidgetType::Toggle, WidgetType::Dropdown, WidgetType::Textbox]);
        assert_eq!(c.cheapest(&[1.0, 1.0]).unwrap().0, WidgetType::Toggle);
        let ranges = dom(&[&[Value::Int(1), Value::Int(5)], &[Value::Int(2), Value::Float(9.5)]]);
        assert!(candidate_widgets(2, false, &ranges, &WidgetType::ALL).unwrap().types.contains(&WidgetType::RangeSlider));
        let inverted = dom(&[&[Value::Int(5), Value::Int(1)]]);
        assert!(!candidate_widgets(2, false, &inverted, &WidgetType::ALL).unwrap().types.contains(&WidgetType::RangeSlider));
        let fixed = dom(&[&[]]);
        assert_eq!(candidate_widgets(0, false, &fixed, &WidgetType::ALL).unwrap().types, vec![WidgetType::Button]);
        assert_eq!(
            candidate_widgets(1, true, &cities, &WidgetType::ALL).unwrap().types,
            vec![WidgetType::CheckboxList, WidgetType::MultiSelect]
        );
        assert!(matches!(candidate_widgets(1, false, &cities, &[]), Err(SynthError::NoCandidate)));
    }

    #[test]
    fn template_functions() {
        let s = |v: &str| AstNode::new("StrExpr").with_attr("value", v);
        let (t, k, table) = extract_template_function(&[s("USA"), s("EUR")]).unwrap();
        assert_eq!(t.param_count(), 1);
        assert_eq!(k, vec![0]);
        assert_eq!(table, dom(&[&["USA".into()], &["EUR".into()]]));
        let (_, k, table) = extract_template_function(&[AstNode::new("ColExpr").with_attr("name", "a")]).unwrap();
        assert!(k.is_empty() && table.is_empty());
        let eq = |v: &str| AstNode::new("BiExpr").with_attr("op", "=").with_child(AstNode::new("ColExpr").with_attr("name", "cty")).with_child(s(v));
        let (t, k, _) = extract_template_function(&[eq("US"), eq("FR")]).unwrap();
        assert_eq!(t.param_count(), 3);
        assert_eq!(k, vec![2]);
        assert!(matches!(extract_template_function(&[s("a"), eq("b")]), Err(SynthError::HeterogeneousGroup)));
    }
}
