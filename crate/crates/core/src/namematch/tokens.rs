//! Default token lists. Each entry is matched as a whole word sequence after
//! normalization, so entries are written in normalized form.

pub const SUFFIXES: &[&str] = &[
    "SA", "S A", "SAS", "SACI", "SAIC", "SRL", "SPA", "SL", "LTD", "LTDA", "LIMITED", "LLC", "INC", "INCORPORATED", "CORP",
    "CORPORATION", "CO", "COMPANY", "CIA", "GMBH", "AG", "KG", "BV", "NV", "PLC", "PTY", "AB", "OY", "AS", "SARL", "SE",
    "KK", "CO LTD",
];

pub const COUNTRIES: &[&str] = &[
    "ARGENTINA", "AUSTRALIA", "AUSTRIA", "BELGIUM", "BRASIL", "BRAZIL", "CANADA", "CHILE", "CHINA", "PRC", "COLOMBIA",
    "DENMARK", "DEUTSCHLAND", "FINLAND", "FRANCE", "GERMANY", "HOLLAND", "HONG KONG", "INDIA", "INDONESIA", "ITALIA",
    "ITALY", "JAPAN", "KOREA", "MALAYSIA", "MEXICO", "NETHERLANDS", "NORWAY", "PARAGUAY", "PERU", "POLAND", "PORTUGAL",
    "SINGAPORE", "SPAIN", "ESPANA", "SWEDEN", "SWITZERLAND", "TAIWAN", "THAILAND", "TURKEY", "UK", "UNITED KINGDOM",
    "UNITED STATES", "USA", "US", "URUGUAY", "VIETNAM",
];

/// `(alias, canonical)` pairs; the first alias found as a word wins.
pub const ALIASES: &[(&str, &str)] = &[
    ("VOLKSWAGEN", "VOLKSWAGEN"),
    ("VW", "VOLKSWAGEN"),
    ("GENERAL MOTORS", "GENERAL MOTORS"),
    ("GM", "GENERAL MOTORS"),
    ("TOYOTA", "TOYOTA"),
    ("SIEMENS", "SIEMENS"),
    ("BOSCH", "BOSCH"),
    ("SAMSUNG", "SAMSUNG"),
    ("FIAT", "FIAT"),
    ("RENAULT", "RENAULT"),
    ("BASF", "BASF"),
    ("BAYER", "BAYER"),
];
