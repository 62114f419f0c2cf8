package com.mini.text;

import org.minitest.Assert;

public class LineJoinerTest {

    public static void testJoinTwo() {
        Assert.assertEquals("a\nb", LineJoiner.join(new String[]{"a", "b"}));
    }

    public static void testJoinSingle() {
        Assert.assertEquals("solo", LineJoiner.join(new String[]{"solo"}));
    }
}
