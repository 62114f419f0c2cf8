package com.mini.parse;

import org.minitest.Assert;

public class RangeParserTest {

    public static void testLowerBoundInclusive() {
        Assert.assertTrue(RangeParser.inRange(1, 1, 10));
    }

    public static void testUpperBoundInclusive() {
        Assert.assertTrue(RangeParser.inRange(10, 1, 10));
    }

    public static void testInside() {
        Assert.assertTrue(RangeParser.inRange(5, 1, 10));
    }

    public static void testOutside() {
        Assert.assertFalse(RangeParser.inRange(11, 1, 10));
    }
}
