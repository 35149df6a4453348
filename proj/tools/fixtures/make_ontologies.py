#!/usr/bin/env python3
"""Generate the bundled subject ontologies under data/ontologies/.

The outputs are committed; rerun only when the topic tables below change.
Sizes per subject (chapters, LOs, KCs) are fixed by the tables.
"""

import pathlib
import re

import yaml

ROOT = pathlib.Path(__file__).resolve().parents[2]

ASPECTS = ["definition", "mechanism", "application", "comparison", "limitations"]

LO_VERBS = ["Explain", "Describe", "Apply", "Compare", "Analyze", "Identify"]

MISCONCEPTION_TEMPLATES = [
    "{label} only matters in rare special cases",
    "{label} works the same way in every situation",
    "{label} is just another name for {other}",
]

SUBJECTS = {
    "computer_science": {
        "prefix": "cs",
        "title": "Foundations of Computer Science",
        "lo_per_chapter": [4] * 5 + [3] * 11,
        "kc_per_lo_pattern": (25, 3, 28, 2),
        "chapters": [
            ("Introduction to Computer Science", ["computational thinking", "abstraction", "algorithm", "program", "problem decomposition", "pattern recognition", "model of computation", "information"]),
            ("Binary Values and Number Systems", ["binary number", "positional notation", "base conversion", "hexadecimal notation", "bit", "byte", "overflow", "two's complement"]),
            ("Data Representation", ["character encoding", "unicode", "image pixel", "sound sampling", "compression", "lossy compression", "run-length encoding", "metadata"]),
            ("Boolean Logic and Gates", ["boolean expression", "logic gate", "truth table", "and gate", "or gate", "not gate", "circuit", "de morgan law"]),
            ("Computer Architecture", ["cpu", "memory hierarchy", "register", "instruction cycle", "cache", "bus", "clock speed", "input output device"]),
            ("Algorithms and Pseudocode", ["pseudocode", "sequence control", "selection control", "iteration", "algorithm correctness", "tracing", "flowchart", "stepwise refinement"]),
            ("Searching and Sorting", ["linear search", "binary search", "selection sort", "insertion sort", "merge sort", "sorted order", "comparison count", "search space"]),
            ("Algorithm Efficiency", ["running time", "big o notation", "constant time", "linear time", "quadratic time", "logarithmic time", "worst case", "scalability"]),
            ("Programming Fundamentals", ["variable", "data type", "assignment", "expression evaluation", "conditional statement", "loop", "function", "parameter"]),
            ("Data Structures", ["array", "list", "stack", "queue", "tree", "graph", "dictionary", "index"]),
            ("Recursion", ["recursive function", "base case", "recursive case", "call stack", "recursion depth", "divide and conquer", "recursive definition", "memoization"]),
            ("Operating Systems", ["operating system", "process", "scheduling", "file system", "virtual memory", "kernel", "resource management", "multitasking"]),
            ("Networks and the Internet", ["network protocol", "packet switching", "ip address", "routing", "domain name system", "bandwidth", "latency", "client server model"]),
            ("Databases", ["relational table", "primary key", "query", "sql select", "join", "schema", "normalization", "transaction"]),
            ("Computer Security", ["encryption", "public key cryptography", "authentication", "password hashing", "malware", "phishing", "firewall", "access control"]),
            ("Limits of Computation", ["decidability", "halting problem", "intractable problem", "np complete problem", "heuristic", "approximation", "turing machine", "church turing thesis"]),
        ],
    },
    "general_biology": {
        "prefix": "bio",
        "title": "General Biology",
        "lo_per_chapter": [3] * 20,
        "kc_per_lo_pattern": (52, 3, 8, 2),
        "chapters": [
            ("The Study of Life", ["scientific method", "hypothesis", "characteristics of life", "levels of organization", "homeostasis", "evolution theme", "controlled experiment", "biological classification", "emergent property"]),
            ("Chemistry of Life", ["atom", "covalent bond", "hydrogen bond", "water polarity", "ph scale", "buffer", "carbon skeleton", "functional group", "solvent"]),
            ("Biological Macromolecules", ["carbohydrate", "lipid", "protein structure", "amino acid", "nucleic acid", "polymer", "dehydration synthesis", "hydrolysis", "denaturation"]),
            ("Cell Structure", ["cell theory", "prokaryotic cell", "eukaryotic cell", "nucleus", "ribosome", "mitochondrion", "chloroplast", "cytoskeleton", "endomembrane system"]),
            ("Membranes and Transport", ["phospholipid bilayer", "diffusion", "osmosis", "facilitated diffusion", "active transport", "sodium potassium pump", "endocytosis", "tonicity", "membrane protein"]),
            ("Energy and Metabolism", ["metabolic pathway", "free energy", "atp", "enzyme", "activation energy", "active site", "enzyme inhibition", "coupled reaction", "cofactor"]),
            ("Cellular Respiration", ["glycolysis", "citric acid cycle", "electron transport chain", "oxidative phosphorylation", "fermentation", "nadh", "aerobic respiration", "anaerobic respiration", "chemiosmosis"]),
            ("Photosynthesis", ["photosynthesis food source", "light reactions", "calvin cycle", "chlorophyll", "photosystem", "carbon fixation", "stomata", "glucose production", "light absorption"]),
            ("Cell Communication", ["signal transduction", "receptor", "ligand", "second messenger", "phosphorylation cascade", "hormone signaling", "cell response", "signal amplification", "apoptosis"]),
            ("Cell Division", ["cell cycle", "mitosis", "cytokinesis", "chromosome", "sister chromatid", "checkpoint", "cancer", "interphase", "spindle"]),
            ("Meiosis and Reproduction", ["meiosis", "haploid cell", "diploid cell", "crossing over", "independent assortment", "gamete", "fertilization", "genetic variation", "nondisjunction"]),
            ("Mendelian Genetics", ["allele", "dominant trait", "recessive trait", "genotype", "phenotype", "punnett square", "law of segregation", "test cross", "incomplete dominance"]),
            ("DNA Structure and Replication", ["double helix", "base pairing", "dna replication", "dna polymerase", "leading strand", "lagging strand", "semiconservative replication", "telomere", "dna repair"]),
            ("Gene Expression", ["transcription", "translation", "messenger rna", "codon", "transfer rna", "promoter", "gene regulation", "operon", "mutation"]),
            ("Biotechnology", ["recombinant dna", "pcr", "gel electrophoresis", "cloning", "gene editing", "dna sequencing", "genetically modified organism", "restriction enzyme", "bioethics"]),
            ("Evolution", ["natural selection", "adaptation", "fitness", "common descent", "fossil record", "homologous structure", "speciation", "genetic drift", "gene flow"]),
            ("Diversity of Life", ["bacteria", "archaea", "protist", "fungi", "plant diversity", "animal diversity", "virus", "phylogenetic tree", "domain"]),
            ("Plant Biology", ["root system", "xylem", "phloem", "transpiration", "plant hormone", "pollination", "seed", "plant growth", "tropism"]),
            ("Animal Physiology", ["circulatory system", "respiratory system", "digestive system", "nervous system", "immune system", "endocrine system", "negative feedback", "neuron", "antibody"]),
            ("Ecology", ["ecosystem", "food web", "energy pyramid", "nutrient cycle", "population growth", "carrying capacity", "community interaction", "biome", "biodiversity"]),
        ],
    },
    "inorganic_chemistry": {
        "prefix": "chem",
        "title": "Introduction to Inorganic Chemistry",
        "lo_per_chapter": [5] * 9 + [4] * 3,
        "kc_per_lo_pattern": (6, 4, 51, 3),
        "chapters": [
            ("Review of Chemical Bonding", ["lewis structure", "formal charge", "resonance", "octet rule", "electronegativity", "bond polarity", "vsepr theory", "molecular geometry", "bond order", "hybridization", "ionic bond", "covalent character", "dipole moment", "valence electron", "expanded octet"]),
            ("Molecular Orbital Theory", ["molecular orbital", "bonding orbital", "antibonding orbital", "orbital energy diagram", "homonuclear diatomic", "heteronuclear diatomic", "homo and lumo", "paramagnetism", "sigma bond", "pi bond", "orbital overlap", "bond dissociation", "photoelectron spectrum", "nonbonding orbital", "orbital mixing"]),
            ("Acid-Base and Donor-Acceptor Chemistry", ["bronsted acid", "lewis acid", "lewis base", "conjugate base", "acid strength", "hard and soft acids", "pka", "superacid", "amphoteric oxide", "leveling effect", "donor atom", "acceptor orbital", "proton affinity", "hydrolysis of cations", "oxoacid"]),
            ("Redox Stability and Reactivity", ["oxidation state", "reduction potential", "latimer diagram", "frost diagram", "disproportionation", "comproportionation", "pourbaix diagram", "nernst equation", "oxidizing agent", "reducing agent", "standard hydrogen electrode", "electrochemical series", "half reaction", "overpotential", "cell potential"]),
            ("Ionic and Covalent Solids", ["crystal lattice", "unit cell", "close packing", "lattice energy", "born haber cycle", "radius ratio", "coordination number", "ionic radius", "band theory", "semiconductor", "doping", "network solid", "metallic bonding", "defect", "perovskite structure"]),
            ("Periodic Trends", ["atomic radius", "ionization energy", "electron affinity", "effective nuclear charge", "shielding", "diagonal relationship", "inert pair effect", "lanthanide contraction", "metallic character", "periodic table block", "relativistic effect", "first row anomaly", "electron configuration", "aufbau principle", "hund rule"]),
            ("Hydrogen and the s-Block Elements", ["hydrogen isotopes", "hydride", "alkali metal", "alkaline earth metal", "flame color", "reaction with water", "solvated electron", "crown ether", "hydrogen storage", "lithium anomaly", "beryllium covalency", "hard water", "electrolysis", "metal hydroxide", "peroxide"]),
            ("The p-Block Elements", ["boron hydride", "aluminum chemistry", "carbon allotrope", "silicate", "nitrogen fixation", "phosphorus allotrope", "oxygen allotrope", "sulfur oxide", "halogen", "interhalogen", "noble gas compound", "catenation", "group trend", "oxide acidity", "multiple bonding"]),
            ("Coordination Chemistry", ["coordination complex", "ligand", "chelate effect", "coordination number geometry", "isomerism", "nomenclature of complexes", "crystal field theory", "crystal field splitting", "spectrochemical series", "high spin complex", "low spin complex", "jahn teller distortion", "ligand field theory", "color of complexes", "magnetic moment"]),
            ("Organometallic Chemistry", ["eighteen electron rule", "metal carbonyl", "oxidative addition", "reductive elimination", "migratory insertion", "ferrocene", "catalytic cycle", "hapticity", "back bonding", "beta hydride elimination", "cross coupling", "hydroformylation", "metallocene", "alkene complex", "ligand substitution"]),
            ("Bioinorganic Chemistry", ["metalloprotein", "hemoglobin", "myoglobin", "cytochrome", "zinc enzyme", "iron sulfur cluster", "nitrogenase", "photosystem manganese", "metal toxicity", "chelation therapy", "cisplatin", "trace element", "oxygen binding", "electron transfer protein", "metal homeostasis"]),
            ("Nuclear and Materials Chemistry", ["radioactive decay", "half life", "nuclear binding energy", "fission", "fusion", "radiocarbon dating", "zeolite", "nanomaterial", "superconductor", "ceramic", "catalyst support", "battery material", "solar cell material", "magnetic material", "glass"]),
        ],
    },
}


def slug(text):
    return re.sub(r"[^a-z0-9]+", "_", text.lower()).strip("_")


def kc_counts(pattern, total_los):
    n_a, size_a, n_b, size_b = pattern
    assert n_a + n_b == total_los
    return [size_a] * n_a + [size_b] * n_b


def build(subject_id, table):
    prefix = table["prefix"]
    chapters, los, kcs = [], [], {}
    lo_kc_sizes = kc_counts(table["kc_per_lo_pattern"], sum(table["lo_per_chapter"]))
    lo_index = 0
    for ch_no, ((title, terms), n_lo) in enumerate(
        zip(table["chapters"], table["lo_per_chapter"]), start=1
    ):
        ch_id = f"{prefix}_ch{ch_no:02d}"
        lo_ids = []
        labels = []
        need = sum(lo_kc_sizes[lo_index : lo_index + n_lo])
        aspect_round = 0
        while len(labels) < need:
            for term in terms:
                if len(labels) == need:
                    break
                if aspect_round == 0:
                    labels.append(term)
                else:
                    labels.append(f"{term} {ASPECTS[(aspect_round - 1) % len(ASPECTS)]}")
            aspect_round += 1
        cursor = 0
        for lo_no in range(1, n_lo + 1):
            size = lo_kc_sizes[lo_index]
            lo_id = f"{prefix}_lo{ch_no:02d}_{lo_no}"
            kc_ids = []
            for label in labels[cursor : cursor + size]:
                kc_id = f"{prefix}_kc_{slug(label)}"
                assert kc_id not in kcs, kc_id
                other = labels[(cursor + 1) % len(labels)] if len(labels) > 1 else "a related idea"
                n_mis = 1 + (len(kcs) % 3 == 0)
                misconceptions = []
                for m in range(n_mis):
                    tmpl = MISCONCEPTION_TEMPLATES[(len(kcs) + m) % len(MISCONCEPTION_TEMPLATES)]
                    misconceptions.append(
                        {
                            "id": f"mc{m + 1}",
                            "description": tmpl.format(label=label.capitalize(), other=other),
                        }
                    )
                kcs[kc_id] = {
                    "label": label,
                    "description": f"{label.capitalize()} is a core idea of {title.lower()} used to reason about related problems",
                    "misconceptions": misconceptions,
                }
                kc_ids.append(kc_id)
            cursor += size
            verb = LO_VERBS[(lo_index) % len(LO_VERBS)]
            focus = " and ".join(labels[cursor - size : cursor][:2])
            los.append(
                {
                    "id": lo_id,
                    "statement": f"{verb} {focus} in the context of {title.lower()}",
                    "kc_ids": kc_ids,
                }
            )
            lo_ids.append(lo_id)
            lo_index += 1
        chapters.append({"id": ch_id, "title": title, "learning_objectives": lo_ids})
    return {
        "subject_id": subject_id,
        "version": 1,
        "chapters": chapters,
        "learning_objectives": los,
        "knowledge_components": kcs,
    }


def main():
    out_dir = ROOT / "data" / "ontologies"
    out_dir.mkdir(parents=True, exist_ok=True)
    for subject_id, table in SUBJECTS.items():
        doc = build(subject_id, table)
        if subject_id == "general_biology":
            kc = doc["knowledge_components"]["bio_kc_photosynthesis_food_source"]
            kc["description"] = "Plants make their own food through photosynthesis rather than taking it from soil"
            kc["misconceptions"] = [
                {"id": "mc_soil_food", "description": "Plants get their food from the soil through their roots"}
            ]
        path = out_dir / f"{subject_id}.yaml"
        with path.open("w") as fh:
            yaml.safe_dump(doc, fh, sort_keys=False, width=120, allow_unicode=True)
        print(
            f"{path.name}: {len(doc['chapters'])} chapters, "
            f"{len(doc['learning_objectives'])} LOs, {len(doc['knowledge_components'])} KCs"
        )


if __name__ == "__main__":
    main()
