use crate::gres::{parse_gres_expression, GresEntry, GresError, GresList};

const GRES_OPTION: &str = "--gres=";

fn satisfies(offer: &GresEntry, want: &GresEntry) -> bool {
    offer.name() == want.name()
        && want.subtype().is_none_or(|s| offer.subtype() == Some(s))
        && offer.count() >= want.count()
}

/// Whether the whole request fits on a single advertised node class.
///
/// Each requested entry needs an advertised entry of the same name, a
/// compatible subtype (equal, or none requested) and at least the requested
/// count. Counts are not summed across classes. An empty request always
/// matches.
pub fn match_target(requested: &GresList, advertised: &[GresList]) -> bool {
    requested.is_empty()
        || advertised.iter().any(|class| {
            requested
                .iter()
                .all(|want| class.iter().any(|offer| satisfies(offer, want)))
        })
}

/// Collects the GRES request carried by `--gres=` node properties.
pub fn requested_gres<S: AsRef<str>>(node_properties: &[S]) -> Result<GresList, GresError> {
    let mut request = GresList::default();
    for prop in node_properties {
        if let Some(expr) = prop.as_ref().trim().strip_prefix(GRES_OPTION) {
            request.extend(parse_gres_expression(expr)?.entries().iter().cloned());
        }
    }
    Ok(request)
}
