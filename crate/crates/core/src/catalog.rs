//! The bundled hospital dataset and read access to its relations.
//!
//! The catalog is built once and never mutated. It holds three relations
//! (`Department`, `Doctor`, `Patient`) linked by two foreign keys, which is
//! enough to express join chains of up to three tables.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CatalogError;

/// Column type. Every attribute has exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttributeType {
    Integer,
    Text,
}

impl fmt::Display for AttributeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeType::Integer => f.write_str("Integer"),
            AttributeType::Text => f.write_str("Text"),
        }
    }
}

/// A scalar cell value. There is no NULL.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Integer(i64),
    Text(String),
}

impl Value {
    pub fn attribute_type(&self) -> AttributeType {
        match self {
            Value::Integer(_) => AttributeType::Integer,
            Value::Text(_) => AttributeType::Text,
        }
    }

    /// Compares two values of the same type. Integers compare numerically,
    /// text by code point. Returns `None` for mixed types.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Integer(a), Value::Integer(b)) => Some(a.cmp(b)),
            // UTF-8 byte order coincides with code point order.
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Integer(i) => write!(f, "{i}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Integer(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_owned())
    }
}

pub type Row = Vec<Value>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: AttributeType,
}

/// Schema of a stored relation. Attribute order is significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub relation_name: String,
    pub attributes: Vec<Attribute>,
}

impl Schema {
    pub fn position(&self, attribute: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == attribute)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForeignKey {
    pub from_relation: String,
    pub from_attribute: String,
    pub to_relation: String,
    pub to_attribute: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub schema: Schema,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    relations: BTreeMap<String, Table>,
    foreign_keys: Vec<ForeignKey>,
}

/// Serialized catalog: `{relations: [{name, attributes, rows}], foreign_keys}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogExport {
    pub relations: Vec<RelationExport>,
    pub foreign_keys: Vec<ForeignKey>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationExport {
    pub name: String,
    pub attributes: Vec<Attribute>,
    pub rows: Vec<Row>,
}

/// Returns the seed catalog.
pub fn load_catalog() -> Catalog {
    let catalog = Catalog {
        relations: seed_tables().into_iter().map(|t| (t.schema.relation_name.clone(), t)).collect(),
        foreign_keys: vec![fk("Doctor", "departmentId", "Department", "id"), fk("Patient", "doctorId", "Doctor", "id")],
    };
    catalog.validate().expect("bundled seed catalog is inconsistent");
    catalog
}

fn fk(from_relation: &str, from_attribute: &str, to_relation: &str, to_attribute: &str) -> ForeignKey {
    ForeignKey {
        from_relation: from_relation.into(),
        from_attribute: from_attribute.into(),
        to_relation: to_relation.into(),
        to_attribute: to_attribute.into(),
    }
}

fn table(name: &str, attributes: &[(&str, AttributeType)], rows: Vec<Row>) -> Table {
    Table {
        schema: Schema {
            relation_name: name.into(),
            attributes: attributes.iter().map(|&(n, ty)| Attribute { name: n.into(), ty }).collect(),
        },
        rows,
    }
}

fn seed_tables() -> Vec<Table> {
    use AttributeType::{Integer, Text};
    let row3 = |id: i64, name: &str, fk: i64| vec![Value::from(id), Value::from(name), Value::from(fk)];
    vec![
        table(
            "Department",
            &[("id", Integer), ("name", Text)],
            vec![
                vec![1.into(), "Cardiology".into()],
                vec![2.into(), "Neurology".into()],
                vec![3.into(), "Oncology".into()],
            ],
        ),
        table(
            "Doctor",
            &[("id", Integer), ("name", Text), ("departmentId", Integer)],
            vec![row3(10, "Alice", 1), row3(11, "Bob", 1), row3(12, "Carol", 2)],
        ),
        table(
            "Patient",
            &[("id", Integer), ("name", Text), ("doctorId", Integer)],
            vec![row3(100, "Dan", 10), row3(101, "Eve", 10), row3(102, "Fay", 12), row3(103, "Gus", 11)],
        ),
    ]
}

impl Catalog {
    pub fn relation_schema(&self, name: &str) -> Result<&Schema, CatalogError> {
        self.scan(name).map(|t| &t.schema)
    }

    /// Full contents of a relation, in seed order.
    pub fn scan(&self, name: &str) -> Result<&Table, CatalogError> {
        self.relations.get(name).ok_or_else(|| CatalogError::UnknownRelation(name.to_owned()))
    }

    pub fn relations(&self) -> impl Iterator<Item = &Table> {
        self.relations.values()
    }

    pub fn relation_names(&self) -> impl Iterator<Item = &str> {
        self.relations.keys().map(String::as_str)
    }

    pub fn foreign_keys(&self) -> &[ForeignKey] {
        &self.foreign_keys
    }

    /// Checks row arity and types, attribute-name uniqueness, and that every
    /// foreign key value is present in the referenced column.
    pub fn validate(&self) -> Result<(), CatalogError> {
        for t in self.relations.values() {
            let mut seen = BTreeSet::new();
            for a in &t.schema.attributes {
                if !seen.insert(a.name.as_str()) {
                    return Err(CatalogError::Corrupt(format!(
                        "duplicate attribute {}.{}",
                        t.schema.relation_name, a.name
                    )));
                }
            }
            for (i, row) in t.rows.iter().enumerate() {
                let well_typed = row.len() == t.schema.attributes.len()
                    && row.iter().zip(&t.schema.attributes).all(|(v, a)| v.attribute_type() == a.ty);
                if !well_typed {
                    return Err(CatalogError::Corrupt(format!(
                        "row {i} of {} does not match its schema",
                        t.schema.relation_name
                    )));
                }
            }
        }
        for fk in &self.foreign_keys {
            let values = |rel: &str, attr: &str| -> Result<BTreeSet<&Value>, CatalogError> {
                let t = self.scan(rel)?;
                let pos = t
                    .schema
                    .position(attr)
                    .ok_or_else(|| CatalogError::Corrupt(format!("foreign key names missing column {rel}.{attr}")))?;
                Ok(t.rows.iter().map(|r| &r[pos]).collect())
            };
            let from = values(&fk.from_relation, &fk.from_attribute)?;
            let to = values(&fk.to_relation, &fk.to_attribute)?;
            if !from.is_subset(&to) {
                return Err(CatalogError::Corrupt(format!(
                    "dangling reference {}.{} -> {}.{}",
                    fk.from_relation, fk.from_attribute, fk.to_relation, fk.to_attribute
                )));
            }
        }
        Ok(())
    }

    pub fn export(&self) -> CatalogExport {
        CatalogExport {
            relations: self
                .relations
                .values()
                .map(|t| RelationExport {
                    name: t.schema.relation_name.clone(),
                    attributes: t.schema.attributes.clone(),
                    rows: t.rows.clone(),
                })
                .collect(),
            foreign_keys: self.foreign_keys.clone(),
        }
    }
}
