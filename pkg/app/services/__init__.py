"""
Services for separating and splitting families: ground types, recognizers,
constructions, counts, exact searches and the experiment harness.
"""
