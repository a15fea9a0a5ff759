import pytest

from verco.kitchen import (
    AgentAction,
    DishSpec,
    Verb,
    create,
    local_view,
    step,
)
from verco.model.vocab import ContextBudget, build_default_vocabulary
from verco.text import (
    FALLBACK_SENTENCE,
    PromptTooLongError,
    TemplateError,
    action_prompt,
    load_template,
    message_prompt,
    offset_phrase,
    teacher_prompt,
    textualize,
)

TOMATO_SALAD = DishSpec.TOMATO_SALAD


def obs_for(map_id="single_room", agent=0, seed=0):
    state = create(map_id, TOMATO_SALAD, seed)
    return textualize(local_view(state, agent))


class TestTextualize:
    def test_mentions_each_visible_station_once(self):
        state = create("single_room", TOMATO_SALAD, 0)
        # walk agent 1 up to (2,1): the tomato source at (0,1) enters the window
        for joint in [[AgentAction(Verb.MOVE_UP), AgentAction(Verb.NOOP)]] * 3:
            step(state, joint)
        text = textualize(local_view(state, 0)).text
        assert text.count("tomato source") == 1
        assert "north" in text.split("tomato source", 1)[1]

    def test_fallback_when_nothing_visible(self):
        # build a window with an empty neighbourhood by placing the agent
        # mid-floor on the single room and blanking nearby stations
        state = create("single_room", TOMATO_SALAD, 0)
        pose = state.agents[0]
        state.agents[0] = pose.__class__(position=(2, 3), facing=pose.facing, held=None)
        text = textualize(local_view(state, 0)).text
        if FALLBACK_SENTENCE not in text:
            # stations are visible from the centre; instead check the exact
            # degenerate rendering on a synthetic occluded window
            from verco.kitchen.types import ObservationWindow, Direction

            window = ObservationWindow(
                center=(0, 0),
                cells=tuple(tuple(None for _ in range(5)) for _ in range(5)),
                own_held=None,
                own_facing=Direction.NORTH,
            )
            assert FALLBACK_SENTENCE in textualize(window).text

    def test_purity_same_window_same_text(self):
        state = create("separate_rooms", TOMATO_SALAD, 0)
        w = local_view(state, 1)
        assert textualize(w).text == textualize(w).text

    def test_held_item_and_facing_lead(self):
        text = obs_for().text
        assert text.startswith("You hold nothing. You face north.")

    def test_offset_phrase_composition(self):
        assert offset_phrase(-2, 1) == "two steps north and one step east"
        assert offset_phrase(1, 0) == "one step south"
        with pytest.raises(ValueError):
            offset_phrase(0, 0)


class TestTeacherPrompt:
    def test_contains_agent_sections_in_order(self):
        obs = [obs_for(agent=0), obs_for(agent=1)]
        prompt = teacher_prompt(obs, 2)
        assert "The observation of Agent 1:" in prompt
        assert "The observation of Agent 2:" in prompt
        assert prompt.index("Agent 1") < prompt.index("Agent 2")

    def test_contains_ten_word_instruction(self):
        obs = [obs_for(agent=0), obs_for(agent=1)]
        assert "within 10 words" in teacher_prompt(obs, 2)

    def test_permuting_observations_permutes_sections_only(self):
        o1, o2 = obs_for(agent=0), obs_for(agent=1, map_id="separate_rooms")
        a = teacher_prompt([o1, o2], 2)
        b = teacher_prompt([o2, o1], 2)
        assert a != b
        assert a.replace(o1.text, "X").replace(o2.text, "Y") == b.replace(
            o2.text, "X"
        ).replace(o1.text, "Y")

    def test_obs_count_mismatch_rejected(self):
        with pytest.raises(ValueError):
            teacher_prompt([obs_for()], 2)


class TestMessageAndActionPrompts:
    def test_action_prompt_without_messages_has_no_message_section(self):
        prompt = action_prompt(obs_for(), [])
        assert "says" not in prompt
        assert prompt.endswith("You choose:")

    def test_action_prompt_embeds_message_verbatim(self):
        prompt = action_prompt(obs_for(), ["Take the plate."])
        assert "Your teammate says: Take the plate." in prompt

    def test_message_prompt_prefix_stable(self):
        p1 = message_prompt(obs_for(agent=0))
        p2 = message_prompt(obs_for(agent=1))
        suffix = "You send a short message to your teammate:"
        assert p1.endswith(suffix) and p2.endswith(suffix)
        assert p1.replace(obs_for(agent=0).text, "") == p2.replace(obs_for(agent=1).text, "")

    def test_slot_values_appear_exactly_once(self):
        obs = obs_for()
        message = "Deliver the dish now."
        prompt = action_prompt(obs, [message])
        assert prompt.count(obs.text) == 1
        assert prompt.count(message) == 1

    def test_budget_violation_raises_instead_of_truncating(self):
        vocab = build_default_vocabulary()
        tiny = ContextBudget(vocab, limit=5)
        with pytest.raises(PromptTooLongError):
            message_prompt(obs_for(), budget=tiny)
        roomy = ContextBudget(vocab, limit=256)
        assert message_prompt(obs_for(), budget=roomy)


class TestTemplates:
    def test_unknown_slot_rejected(self):
        template = load_template("message")
        with pytest.raises(TemplateError):
            template.render(observation="x", bogus="y")

    def test_missing_slot_rejected(self):
        template = load_template("action")
        with pytest.raises(TemplateError):
            template.render(observation="x")
