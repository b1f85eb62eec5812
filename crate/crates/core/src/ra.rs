//! Relational algebra expression trees, positional node addressing, and
//! schema inference with name resolution.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::catalog::{AttributeType, Catalog};
use crate::error::{BindError, InvalidPath};
use crate::sql::{ColumnRef, Operand, Predicate};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RaExpr {
    Relation { name: String, alias: Option<String> },
    Selection { predicate: Predicate, child: Box<RaExpr> },
    Projection { columns: Vec<ColumnRef>, child: Box<RaExpr> },
    Join { predicate: Predicate, left: Box<RaExpr>, right: Box<RaExpr> },
    CrossProduct { left: Box<RaExpr>, right: Box<RaExpr> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Relation,
    Selection,
    Projection,
    Join,
    CrossProduct,
}

impl NodeKind {
    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Relation => "relation",
            NodeKind::Selection => "selection",
            NodeKind::Projection => "projection",
            NodeKind::Join => "join",
            NodeKind::CrossProduct => "cross",
        }
    }
}

impl RaExpr {
    pub fn relation(name: impl Into<String>) -> Self {
        RaExpr::Relation { name: name.into(), alias: None }
    }

    pub fn aliased(name: impl Into<String>, alias: impl Into<String>) -> Self {
        RaExpr::Relation { name: name.into(), alias: Some(alias.into()) }
    }

    pub fn select(self, predicate: Predicate) -> Self {
        RaExpr::Selection { predicate, child: Box::new(self) }
    }

    pub fn project(self, columns: Vec<ColumnRef>) -> Self {
        RaExpr::Projection { columns, child: Box::new(self) }
    }

    pub fn join(self, predicate: Predicate, right: RaExpr) -> Self {
        RaExpr::Join { predicate, left: Box::new(self), right: Box::new(right) }
    }

    pub fn cross(self, right: RaExpr) -> Self {
        RaExpr::CrossProduct { left: Box::new(self), right: Box::new(right) }
    }

    pub fn kind(&self) -> NodeKind {
        match self {
            RaExpr::Relation { .. } => NodeKind::Relation,
            RaExpr::Selection { .. } => NodeKind::Selection,
            RaExpr::Projection { .. } => NodeKind::Projection,
            RaExpr::Join { .. } => NodeKind::Join,
            RaExpr::CrossProduct { .. } => NodeKind::CrossProduct,
        }
    }

    pub fn children(&self) -> Vec<&RaExpr> {
        match self {
            RaExpr::Relation { .. } => vec![],
            RaExpr::Selection { child, .. } | RaExpr::Projection { child, .. } => vec![child],
            RaExpr::Join { left, right, .. } | RaExpr::CrossProduct { left, right } => {
                vec![left, right]
            }
        }
    }

    fn child_mut(&mut self, index: usize) -> Option<&mut RaExpr> {
        match (self, index) {
            (RaExpr::Selection { child, .. } | RaExpr::Projection { child, .. }, 0) => Some(child),
            (RaExpr::Join { left, .. } | RaExpr::CrossProduct { left, .. }, 0) => Some(left),
            (RaExpr::Join { right, .. } | RaExpr::CrossProduct { right, .. }, 1) => Some(right),
            _ => None,
        }
    }

    /// The subtree at `path`; the root for the empty path.
    pub fn node_at(&self, path: &NodePath) -> Result<&RaExpr, InvalidPath> {
        let mut node = self;
        for &i in path.indices() {
            node = *node.children().get(i).ok_or_else(|| InvalidPath(path.clone()))?;
        }
        Ok(node)
    }

    pub fn node_at_mut(&mut self, path: &NodePath) -> Result<&mut RaExpr, InvalidPath> {
        let mut node = self;
        for &i in path.indices() {
            node = node.child_mut(i).ok_or_else(|| InvalidPath(path.clone()))?;
        }
        Ok(node)
    }

    /// Pre-order listing of every node: parent before children, left
    /// before right.
    pub fn enumerate_nodes(&self) -> Vec<(NodePath, NodeKind)> {
        fn walk(e: &RaExpr, path: NodePath, out: &mut Vec<(NodePath, NodeKind)>) {
            out.push((path.clone(), e.kind()));
            for (i, c) in e.children().into_iter().enumerate() {
                walk(c, path.child(i), out);
            }
        }
        let mut out = Vec::new();
        walk(self, NodePath::root(), &mut out);
        out
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().into_iter().map(RaExpr::node_count).sum::<usize>()
    }

    /// Qualifiers visible in this subtree's output.
    pub fn qualifiers(&self) -> BTreeSet<String> {
        match self {
            RaExpr::Relation { name, alias } => BTreeSet::from([alias.clone().unwrap_or_else(|| name.clone())]),
            RaExpr::Selection { child, .. } => child.qualifiers(),
            RaExpr::Projection { columns, child } => {
                let below = child.qualifiers();
                let mut out = BTreeSet::new();
                for c in columns {
                    match &c.qualifier {
                        Some(q) => {
                            out.insert(q.clone());
                        }
                        // Unbound reference: conservatively keep everything.
                        None => return below,
                    }
                }
                out
            }
            RaExpr::Join { left, right, .. } | RaExpr::CrossProduct { left, right } => {
                let mut q = left.qualifiers();
                q.extend(right.qualifiers());
                q
            }
        }
    }
}

/// Address of a subexpression: child indices from the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodePath(Vec<usize>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn new(indices: Vec<usize>) -> Self {
        NodePath(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, index: usize) -> NodePath {
        let mut v = self.0.clone();
        v.push(index);
        NodePath(v)
    }

    pub fn parent(&self) -> Option<NodePath> {
        let (_, rest) = self.0.split_last()?;
        Some(NodePath(rest.to_vec()))
    }
}

impl From<Vec<usize>> for NodePath {
    fn from(v: Vec<usize>) -> Self {
        NodePath(v)
    }
}

/// Dotted form, e.g. `0.1`; the root is the empty string.
impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{idx}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsePathError(pub String);

impl fmt::Display for ParsePathError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed node path {:?}", self.0)
    }
}

impl std::error::Error for ParsePathError {}

impl FromStr for NodePath {
    type Err = ParsePathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Ok(NodePath::root());
        }
        s.split('.')
            .map(|part| part.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map(NodePath)
            .map_err(|_| ParsePathError(s.to_owned()))
    }
}

impl Serialize for NodePath {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BoundColumn {
    pub qualifier: String,
    pub attribute: String,
    #[serde(rename = "type")]
    pub ty: AttributeType,
}

impl BoundColumn {
    pub fn column_ref(&self) -> ColumnRef {
        ColumnRef::qualified(&self.qualifier, &self.attribute)
    }
}

impl fmt::Display for BoundColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.qualifier, self.attribute)
    }
}

/// Output columns of an expression, each tagged with its qualifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(transparent)]
pub struct BoundSchema {
    pub columns: Vec<BoundColumn>,
}

impl BoundSchema {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn qualifiers(&self) -> BTreeSet<&str> {
        self.columns.iter().map(|c| c.qualifier.as_str()).collect()
    }

    /// Index of the unique column matching `r`.
    pub fn resolve(&self, r: &ColumnRef) -> Result<usize, BindError> {
        let mut hits = self
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.attribute == r.attribute && r.qualifier.as_ref().is_none_or(|q| *q == c.qualifier));
        match (hits.next(), hits.next()) {
            (Some((i, _)), None) => Ok(i),
            (Some(_), Some(_)) => Err(BindError::AmbiguousColumn(r.clone())),
            (None, _) => Err(BindError::UnknownColumn(r.clone())),
        }
    }

    /// `r` with its qualifier filled in.
    pub fn qualify(&self, r: &ColumnRef) -> Result<ColumnRef, BindError> {
        self.resolve(r).map(|i| self.columns[i].column_ref())
    }

    pub(crate) fn concat(mut self, right: BoundSchema) -> Result<BoundSchema, BindError> {
        let left_quals: BTreeSet<String> = self.qualifiers().into_iter().map(str::to_owned).collect();
        if let Some(dup) = right.columns.iter().find(|c| left_quals.contains(&c.qualifier)) {
            return Err(BindError::DuplicateQualifier(dup.qualifier.clone()));
        }
        self.columns.extend(right.columns);
        Ok(self)
    }
}

/// Qualifies every column reference in `p` against `schema` and checks that
/// each comparison relates operands of the same type.
pub fn bind_predicate(p: &Predicate, schema: &BoundSchema) -> Result<Predicate, BindError> {
    let bound = p.try_map_columns(&mut |c| schema.qualify(c))?;
    check_types(&bound, schema)?;
    Ok(bound)
}

fn operand_type(o: &Operand, schema: &BoundSchema) -> Result<AttributeType, BindError> {
    Ok(match o {
        Operand::Column(c) => schema.columns[schema.resolve(c)?].ty,
        Operand::Integer(_) => AttributeType::Integer,
        Operand::Text(_) => AttributeType::Text,
    })
}

fn check_types(p: &Predicate, schema: &BoundSchema) -> Result<(), BindError> {
    match p {
        Predicate::Comparison { left, right, .. } => {
            let (lt, rt) = (operand_type(left, schema)?, operand_type(right, schema)?);
            if lt != rt {
                return Err(BindError::TypeMismatch { comparison: p.to_string(), left: lt, right: rt });
            }
            Ok(())
        }
        Predicate::And(l, r) | Predicate::Or(l, r) => {
            check_types(l, schema)?;
            check_types(r, schema)
        }
        Predicate::Not(inner) => check_types(inner, schema),
    }
}

/// Resolves projection columns against `schema`, rejecting repeats.
pub fn bind_columns(columns: &[ColumnRef], schema: &BoundSchema) -> Result<BoundSchema, BindError> {
    let mut out = BoundSchema::default();
    for c in columns {
        let col = schema.columns[schema.resolve(c)?].clone();
        if out.columns.contains(&col) {
            return Err(BindError::DuplicateColumn(col.column_ref()));
        }
        out.columns.push(col);
    }
    Ok(out)
}

/// Output schema of `expr`, validating every name and comparison in it.
pub fn infer_schema(expr: &RaExpr, catalog: &Catalog) -> Result<BoundSchema, BindError> {
    match expr {
        RaExpr::Relation { name, alias } => {
            let schema = catalog.relation_schema(name)?;
            let qualifier = alias.as_ref().unwrap_or(name);
            Ok(BoundSchema {
                columns: schema
                    .attributes
                    .iter()
                    .map(|a| BoundColumn { qualifier: qualifier.clone(), attribute: a.name.clone(), ty: a.ty })
                    .collect(),
            })
        }
        RaExpr::Selection { predicate, child } => {
            let schema = infer_schema(child, catalog)?;
            bind_predicate(predicate, &schema)?;
            Ok(schema)
        }
        RaExpr::Projection { columns, child } => {
            let schema = infer_schema(child, catalog)?;
            bind_columns(columns, &schema)
        }
        RaExpr::Join { predicate, left, right } => {
            let schema = infer_schema(left, catalog)?.concat(infer_schema(right, catalog)?)?;
            bind_predicate(predicate, &schema)?;
            Ok(schema)
        }
        RaExpr::CrossProduct { left, right } => infer_schema(left, catalog)?.concat(infer_schema(right, catalog)?),
    }
}

/// The `(qualifier, attribute)` pairs a bound predicate references.
pub fn predicate_columns(p: &Predicate) -> BTreeSet<(String, String)> {
    p.columns()
}
