"""
Tests for prompt templates and rule generation
"""

import pytest
import sys
import os

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from backends.base import ScriptedBackend
from cli.config import RunConfig
from core.errors import GenerationError, TemplateError
from core.types import Example, Rule, RuleOrigin
from genesis.generator import (
    GenerationRequest,
    generate_rules,
    generation_prompt,
    numbered_list,
    parse_numbered_list,
    render_observations,
    run_generation,
)
from genesis.templates import (
    INFER_RULES,
    INFER_WEIGHTS,
    INFER_WEIGHTS_PREDICTION,
    JUDGMENT,
    OBSERVATION,
    PromptTemplate,
    TemplateSet,
    example_binding,
    load_template_set,
    placeholders_in,
)
from pydantic import ValidationError
from tests.conftest import REPO_ROOT, make_example


def _tweet_pair(example_id: str, label: int, second: bool = True) -> Example:
    fields = {'first_tweet': 'Big news today?'}
    if second:
        fields['second_tweet'] = 'Big news today.'
    return Example(id=example_id, fields=fields, label=label)


class TestTemplates:
    """Template loading and rendering"""

    def test_bundled_sets_load(self, templates, retweet_templates):
        """Test bundled sets load"""
        assert templates.name == 'generic'
        assert retweet_templates.get(JUDGMENT).version == '1'

    def test_undeclared_placeholder(self):
        """Test undeclared placeholder"""
        with pytest.raises(ValidationError):
            PromptTemplate(name='t', version='1', user='Hello ${who}')

    def test_missing_binding(self):
        """Test missing binding"""
        template = PromptTemplate(name='t', version='1', user='Hello ${who}', placeholders={'who'})
        with pytest.raises(TemplateError):
            template.render({})

    def test_render_is_deterministic_and_complete(self, templates):
        """Test render is deterministic and complete"""
        binding = {'hypothesis': 'Short texts win', 'text': 'hi'}
        first = templates.get(JUDGMENT).render(binding)
        assert first == templates.get(JUDGMENT).render(binding)
        assert not placeholders_in(first["user"])

    def test_incomplete_set(self):
        """Test incomplete set"""
        with pytest.raises(ValidationError):
            TemplateSet.from_mapping({'name': 'x', 'templates': {
                'judgment': {'user': 'hi'},
            }})

    def test_missing_file(self, tmp_path):
        """Test missing file"""
        with pytest.raises(TemplateError):
            load_template_set(tmp_path / 'none.yaml')

    def test_versions(self, templates):
        """Test versions"""
        assert set(templates.versions().values()) == {'1'}


class TestShippedTaskSets:
    """Every template set under templates/ and every shipped run config"""

    def test_each_set_renders_every_placeholder(self):
        """Test that each shipped set loads and substitutes all declared placeholders"""
        paths = sorted((REPO_ROOT / 'templates').glob('*.yaml'))
        assert {p.stem for p in paths} >= {'generic', 'retweets', 'headlines', 'reviews'}

        for path in paths:
            template_set = load_template_set(path)
            for key, template in template_set.templates.items():
                binding = {name: f"<{name}-value>" for name in template.placeholders}
                rendered = template.render(binding)
                text = rendered['system'] + "\n" + rendered['user']
                assert not placeholders_in(text), f"{path.name}:{key}"
                for name in template.placeholders:
                    assert f"<{name}-value>" in text, f"{path.name}:{key} drops {name}"

    def test_configs_match_their_template_sets(self):
        """Test that each run config's manifest fields and tokens appear in its prompts"""
        configs = [REPO_ROOT / 'config.yaml'] + sorted((REPO_ROOT / 'configs').glob('*.yaml'))
        assert {p.stem for p in configs} >= {'config', 'headlines', 'reviews'}

        for path in configs:
            config = RunConfig.from_yaml(path)
            manifest = config.dataset.manifest
            template_set = load_template_set(REPO_ROOT / config.dataset.templates)

            judgment = template_set.get(JUDGMENT)
            assert set(manifest.field_names) <= judgment.placeholders, path.name
            assert set(manifest.field_names) <= template_set.get(OBSERVATION).placeholders
            for token in (manifest.positive_token, manifest.negative_token,
                          manifest.abstain_token):
                assert f"{{Final answer: {token}}}" in judgment.user, f"{path.name}: {token}"
            for key in (INFER_RULES, INFER_WEIGHTS, INFER_WEIGHTS_PREDICTION):
                user = template_set.get(key).user
                assert f"{{Final answer: {manifest.positive_token}}}" in user
                assert f"{{Final answer: {manifest.negative_token}}}" in user

    def test_review_prompt(self):
        """Test the single-text review judgment prompt"""
        reviews = load_template_set(REPO_ROOT / 'templates' / 'reviews.yaml')
        example = Example(id='h1', fields={'review': 'My stay was amazing!!'}, label=1)
        user = reviews.get(JUDGMENT).render_user({
            'hypothesis': 'Reviews without room details are deceptive',
            **example_binding(example, ['review']),
        })
        assert 'A hotel review: My stay was amazing!!' in user
        assert user.rstrip().endswith('Final answer:')


class TestRenderObservations:
    """Labeled example blocks"""

    def test_paired_tweet_block(self, retweet_manifest, retweet_templates):
        """Test paired tweet block"""
        block = render_observations([_tweet_pair('t1', 1)], retweet_manifest, retweet_templates)
        assert block.endswith("The first tweet got more retweets.")

    def test_empty_list(self, manifest, templates):
        """Test empty list"""
        assert render_observations([], manifest, templates) == ""

    def test_missing_field(self, retweet_manifest, retweet_templates):
        """Test missing field"""
        with pytest.raises(TemplateError, match="second_tweet"):
            render_observations(
                [_tweet_pair('t2', 0, second=False)], retweet_manifest, retweet_templates
            )

    def test_input_order(self, manifest, templates):
        """Test input order"""
        examples = [make_example('a', 'one', 1), make_example('b', 'two', 0)]
        block = render_observations(examples, manifest, templates)
        assert block.index('one') < block.index('two')
        assert 'Final answer: negative.' in block


class TestParseNumberedList:
    """Numbered-list extraction"""

    def test_brackets_stripped(self):
        """Test brackets stripped"""
        assert parse_numbered_list("1. [Short tweets win]\n2. [Questions win]") == [
            "Short tweets win", "Questions win",
        ]

    def test_continuation_lines(self):
        """Test continuation lines"""
        text = "1. A sentence\nthat wraps\n2. B"
        assert parse_numbered_list(text) == ["A sentence that wraps", "B"]

    def test_empty(self):
        """Test empty"""
        assert parse_numbered_list("") == []

    def test_preamble_ignored(self):
        """Test preamble ignored"""
        assert parse_numbered_list("Proposed hypotheses:\n1. A") == ["A"]

    def test_formatting_round_trip(self):
        """Test formatting round trip"""
        rules = ["Short tweets win", "Questions win", "Links lose"]
        assert parse_numbered_list(numbered_list(rules)) == rules


class TestGenerationRequest:
    """Mode invariants"""

    def test_refinement_needs_prior_rules(self):
        """Test refinement needs prior rules"""
        with pytest.raises(ValidationError):
            GenerationRequest(mode=RuleOrigin.REFINEMENT, observations=(), num_hypotheses=5)

    def test_initial_forbids_prior_rules(self):
        """Test initial forbids prior rules"""
        rule = Rule(rule_id='r', text='x', born_iteration=1)
        with pytest.raises(ValidationError):
            GenerationRequest(
                mode=RuleOrigin.INITIAL, observations=(), prior_rules=(rule,), num_hypotheses=5
            )


class TestGenerateRules:
    """One backend call, parsed into rules"""

    def _request(self, h=3, mode=RuleOrigin.INITIAL, iteration=1, prior=()):
        return GenerationRequest(
            mode=mode,
            observations=(make_example('a', 'one', 1),),
            prior_rules=prior,
            num_hypotheses=h,
            iteration=iteration,
        )

    async def test_three_rules(self, manifest, templates):
        """Test three rules"""
        backend = ScriptedBackend(["1. A\n2. B\n3. C"])
        rules = await generate_rules(backend, self._request(), templates, manifest)
        assert [r.text for r in rules] == ["A", "B", "C"]
        assert all(r.origin is RuleOrigin.INITIAL and r.born_iteration == 1 for r in rules)
        assert len(backend.requests) == 1

    async def test_preamble(self, manifest, templates):
        """Test preamble"""
        backend = ScriptedBackend(["Proposed hypotheses:\n1. A"])
        rules = await generate_rules(backend, self._request(), templates, manifest)
        assert [r.text for r in rules] == ["A"]

    async def test_no_hypotheses(self, manifest, templates):
        """Test no hypotheses"""
        backend = ScriptedBackend(["no hypotheses"])
        with pytest.raises(GenerationError) as info:
            await generate_rules(backend, self._request(), templates, manifest)
        assert info.value.raw == "no hypotheses"

    async def test_batch_dedup_and_cap(self, manifest, templates):
        """Test batch dedup and cap"""
        backend = ScriptedBackend(["1. A\n2.  A \n3. B\n4. C\n5. D"])
        rules = await generate_rules(backend, self._request(h=3), templates, manifest)
        assert [r.text for r in rules] == ["A", "B", "C"]
        assert len({r.rule_id for r in rules}) == 3

    async def test_refinement_prompt_lists_prior_rules(self, manifest, templates):
        """Test refinement prompt lists prior rules"""
        prior = (Rule(rule_id='it01-h01', text='Texts with "alpha" win', born_iteration=1),)
        request = self._request(h=5, mode=RuleOrigin.REFINEMENT, iteration=2, prior=prior)
        chat = generation_prompt(request, templates, manifest)
        assert '1. Texts with "alpha" win' in chat.user
        assert 'Propose 5 hypotheses' in chat.system

        backend = ScriptedBackend(["1. New rule"])
        result = await run_generation(backend, request, templates, manifest)
        assert result.rules[0].origin is RuleOrigin.REFINEMENT
        assert result.rules[0].born_iteration == 2
        assert result.raw == "1. New rule"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
